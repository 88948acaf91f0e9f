#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "predformer/data.hpp"
#include "predformer/model.hpp"

namespace predformer {

enum class SchedulerKind { OneCycle, Cosine };

struct TrainConfig {
    double lr_max = 1e-3;
    double weight_decay = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t epochs = 1;
    int64_t batch_size = 16;
    SchedulerKind scheduler = SchedulerKind::OneCycle;
    double grad_clip = 0.0;  // 0 disables
    double lr_min = 1e-6;    // cosine floor
    uint64_t seed = 0;

    bool operator==(const TrainConfig&) const = default;

    void validate() const {
        if (!(lr_max > 0.0)) throw ConfigError("lr_max must be > 0");
        if (!(weight_decay >= 0.0 && weight_decay < 1.0)) throw ConfigError("weight_decay must lie in [0,1)");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
            throw ConfigError("adam betas must lie in [0,1)");
        }
        if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
        if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch_size must be >= 1");
        if (grad_clip < 0.0) throw ConfigError("grad_clip must be >= 0 (0 disables)");
        if (!(lr_min >= 0.0 && lr_min <= lr_max)) throw ConfigError("lr_min must lie in [0, lr_max]");
    }
};

// ---------------------------------------------------------------------------
// Learning-rate schedules (ticked per optimizer step)
// ---------------------------------------------------------------------------

inline constexpr double kOneCyclePctStart = 0.3;
inline constexpr double kOneCycleDivFactor = 25.0;
inline constexpr double kOneCycleFinalDivFactor = 1e4;

// Cosine warmup from lr_max/25 to lr_max over the first 30% of steps, then
// cosine anneal down to lr_max/1e4.
inline double onecycle_lr(int64_t step, int64_t total_steps, double lr_max) {
    if (total_steps < 1) throw ConfigError("onecycle_lr: total_steps must be >= 1");
    if (step < 0 || step > total_steps) {
        throw ConfigError("onecycle_lr: step " + std::to_string(step) + " outside [0, " +
                          std::to_string(total_steps) + "]");
    }
    const double initial = lr_max / kOneCycleDivFactor;
    const double final_lr = lr_max / kOneCycleFinalDivFactor;
    const int64_t peak = static_cast<int64_t>(kOneCyclePctStart * static_cast<double>(total_steps));
    constexpr double kPi = 3.14159265358979323846;
    if (step <= peak) {
        if (peak == 0) return lr_max;
        const double t = static_cast<double>(step) / static_cast<double>(peak);
        return initial + (lr_max - initial) * 0.5 * (1.0 - std::cos(kPi * t));
    }
    const double t = static_cast<double>(step - peak) / static_cast<double>(total_steps - peak);
    return final_lr + (lr_max - final_lr) * 0.5 * (1.0 + std::cos(kPi * t));
}

// lr_min + (lr_base - lr_min) * (1 + cos(pi * step / total)) / 2
inline double cosine_lr(int64_t step, int64_t total_steps, double lr_base, double lr_min) {
    if (total_steps < 1) throw ConfigError("cosine_lr: total_steps must be >= 1");
    if (step < 0 || step > total_steps) {
        throw ConfigError("cosine_lr: step " + std::to_string(step) + " outside [0, " +
                          std::to_string(total_steps) + "]");
    }
    constexpr double kPi = 3.14159265358979323846;
    const double t = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_min + (lr_base - lr_min) * 0.5 * (1.0 + std::cos(kPi * t));
}

inline double scheduled_lr(const TrainConfig& cfg, int64_t step, int64_t total_steps) {
    return cfg.scheduler == SchedulerKind::OneCycle ? onecycle_lr(step, total_steps, cfg.lr_max)
                                                    : cosine_lr(step, total_steps, cfg.lr_max, cfg.lr_min);
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

// Mean of squared differences, accumulated in f64.
template <typename T>
double l2_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    check_same_shape(pred, target, "l2_loss");
    auto p = pred.data();
    auto t = target.data();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(p.size());
}

// ---------------------------------------------------------------------------
// AdamW
// ---------------------------------------------------------------------------

template <typename T>
struct NamedParam {
    std::string name;
    Tensor<T>* tensor;
};

template <typename T>
std::vector<NamedParam<T>> collect_params(ModelParams<T>& params) {
    std::vector<NamedParam<T>> out;
    params.for_each_param([&out](const std::string& name, Tensor<T>& t) { out.push_back({name, &t}); });
    return out;
}

// First/second moment buffers in parameter enumeration order.
template <typename T>
struct OptimizerState {
    std::vector<Tensor<T>> m, v;
    int64_t step = 0;

    static OptimizerState init_like(ModelParams<T>& params) {
        OptimizerState s;
        params.for_each_param([&s](const std::string&, Tensor<T>& t) {
            s.m.push_back(Tensor<T>::zeros(t.shape()));
            s.v.push_back(Tensor<T>::zeros(t.shape()));
        });
        return s;
    }
};

// Decoupled-weight-decay Adam update:
//   m <- b1 m + (1-b1) g ;  v <- b2 v + (1-b2) g^2  (bias-corrected)
//   theta <- theta - lr * ( m_hat / (sqrt(v_hat) + eps) + wd * theta )
template <typename T>
void adamw_step(std::vector<NamedParam<T>>& params, const std::vector<Tensor<T>>& grads,
                OptimizerState<T>& state, double lr, const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adamw_step: parameter/gradient/state counts differ");
    }
    state.step += 1;
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        const Tensor<T>& g = grads[i];
        check_same_shape(*params[i].tensor, g, "adamw_step");
        if (!g.all_finite()) {
            throw NumericError("adamw_step: non-finite gradient for parameter '" + params[i].name + "'");
        }
        auto th = params[i].tensor->mut_data();
        auto mi = state.m[i].mut_data();
        auto vi = state.v[i].mut_data();
        auto gi = g.data();
        for (size_t j = 0; j < th.size(); ++j) {
            const double gj = static_cast<double>(gi[j]);
            const double mj = b1 * static_cast<double>(mi[j]) + (1.0 - b1) * gj;
            const double vj = b2 * static_cast<double>(vi[j]) + (1.0 - b2) * gj * gj;
            mi[j] = static_cast<T>(mj);
            vi[j] = static_cast<T>(vj);
            const double m_hat = mj / bc1;
            const double v_hat = vj / bc2;
            const double theta = static_cast<double>(th[j]);
            th[j] = static_cast<T>(theta - lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * theta));
        }
    }
}

// Scales all gradients by clip/||g|| when the global norm exceeds clip.
template <typename T>
double clip_global_norm(std::vector<Tensor<T>>& grads, double clip) {
    double sq = 0.0;
    for (const auto& g : grads) {
        for (T v : g.data()) sq += static_cast<double>(v) * static_cast<double>(v);
    }
    const double norm = std::sqrt(sq);
    if (clip > 0.0 && norm > clip) {
        const T scale = static_cast<T>(clip / norm);
        for (auto& g : grads) {
            for (T& v : g.mut_data()) v *= scale;
        }
    }
    return norm;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

template <typename T>
struct TrainState {
    OptimizerState<T> opt;
    int64_t global_step = 0;
    int64_t total_steps = 0;  // fixed when training starts; drives the schedule
    Rng dropout_rng{0};
    std::vector<std::pair<double, double>> history;  // (loss, lr) per step

    static TrainState start(ModelParams<T>& params, const TrainConfig& cfg, int64_t steps_per_epoch) {
        TrainState s;
        s.opt = OptimizerState<T>::init_like(params);
        s.total_steps = cfg.epochs * steps_per_epoch;
        s.dropout_rng = Rng(derive_seed(cfg.seed, seed_stream::kDropout));
        return s;
    }
};

struct EpochStats {
    double mean_loss = 0.0;
    std::vector<double> losses;
    std::vector<double> lrs;
    double seconds = 0.0;
};

template <typename T>
int64_t steps_per_epoch(int64_t num_sequences, int64_t batch_size) {
    return (num_sequences + batch_size - 1) / batch_size;
}

// Deterministic per-epoch sample order; reconstructable from (seed, epoch),
// which is what makes checkpoint resume trace-identical.
inline std::vector<int64_t> epoch_order(uint64_t seed, int64_t epoch, int64_t n) {
    std::vector<int64_t> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, seed_stream::kShuffle) ^ static_cast<uint64_t>(epoch));
    for (int64_t i = n - 1; i > 0; --i) {
        const int64_t j = rng.uniform_int(0, i);
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    return idx;
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, const std::vector<int64_t>& rows) {
    Shape s = x.shape();
    const int64_t inner = x.numel() / s[0];
    s[0] = static_cast<int64_t>(rows.size());
    Tensor<T> out(s);
    const T* xp = x.data().data();
    T* op = out.mut_data().data();
    for (size_t r = 0; r < rows.size(); ++r) {
        std::copy(xp + rows[r] * inner, xp + (rows[r] + 1) * inner, op + static_cast<int64_t>(r) * inner);
    }
    return out;
}

// One full pass over the dataset: forward in train mode, L2 loss, backward,
// optional global-norm clip, AdamW update, scheduler tick per step.
template <typename T>
EpochStats train_epoch(const ModelConfig& model_cfg, ModelParams<T>& params, const SequenceBatch<T>& data,
                       const TrainConfig& cfg, TrainState<T>& state) {
    cfg.validate();
    if (data.t_in != model_cfg.t_in || data.t_out != model_cfg.t_out) {
        throw ConfigError("train_epoch: dataset split " + std::to_string(data.t_in) + "/" +
                          std::to_string(data.t_out) + " does not match the model configuration");
    }
    const auto t_start = std::chrono::steady_clock::now();
    const int64_t n = data.frames.dim(0);
    const int64_t spe = steps_per_epoch<T>(n, cfg.batch_size);
    const int64_t epoch = state.global_step / spe;
    const std::vector<int64_t> order = epoch_order(cfg.seed, epoch, n);

    auto param_refs = collect_params(params);
    EpochStats stats;

    for (int64_t b = 0; b < spe; ++b) {
        const int64_t lo = b * cfg.batch_size;
        const int64_t hi = std::min<int64_t>(lo + cfg.batch_size, n);
        const std::vector<int64_t> rows(order.begin() + lo, order.begin() + hi);
        Tensor<T> batch = gather_rows(data.frames, rows);
        auto [context, target] = split_context_target(batch, data.t_in, data.t_out);

        Tape<T> tape(true);
        Value<T> pred = model_forward(tape, Value<T>(context), model_cfg, params, Mode::Train, state.dropout_rng);
        Value<T> loss = mse_loss(tape, pred, Value<T>(target));
        const double loss_value = static_cast<double>(loss.data.item());
        if (!std::isfinite(loss_value)) {
            throw NumericError("train_epoch: non-finite loss " + std::to_string(loss_value) + " at step " +
                               std::to_string(state.global_step));
        }
        tape.backward(loss);

        std::vector<Tensor<T>> grads;
        grads.reserve(param_refs.size());
        for (auto& p : param_refs) grads.push_back(tape.grad_of(*p.tensor));
        if (cfg.grad_clip > 0.0) clip_global_norm(grads, cfg.grad_clip);

        const double lr = scheduled_lr(cfg, state.global_step, state.total_steps);
        adamw_step(param_refs, grads, state.opt, lr, cfg);

        state.history.emplace_back(loss_value, lr);
        stats.losses.push_back(loss_value);
        stats.lrs.push_back(lr);
        state.global_step += 1;
    }

    stats.mean_loss = std::accumulate(stats.losses.begin(), stats.losses.end(), 0.0) /
                      static_cast<double>(stats.losses.size());
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return stats;
}

}  // namespace predformer

#pragma once

#include <cmath>
#include <variant>

#include "predformer/autodiff.hpp"
#include "predformer/rng.hpp"

namespace predformer {

enum class Mode { Train, Eval };
enum class DropSchedule { Uniform, Linear };
enum class FfnKind { SwiGlu, Mlp };

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kInitStd = 0.02;

// Regularization settings for one forward pass.
struct DropSpec {
    double attn_dropout = 0.0;
    double ffn_dropout = 0.0;
    double drop_path_rate = 0.0;
    DropSchedule schedule = DropSchedule::Uniform;
    Mode mode = Mode::Eval;

    bool operator==(const DropSpec&) const = default;

    void validate() const {
        for (double p : {attn_dropout, ffn_dropout, drop_path_rate}) {
            if (!(p >= 0.0 && p < 1.0)) {
                throw ConfigError("dropout/drop-path probabilities must lie in [0,1), got " + std::to_string(p));
            }
        }
    }
};

// Hidden width of the plain-MLP ablation, sized so its two matrices carry
// the same parameter budget as the three SwiGLU matrices.
inline int64_t mlp_hidden_dim(int64_t swiglu_hidden) { return swiglu_hidden * 3 / 2; }

namespace detail {

// Weight init: truncated normal when an rng is supplied, zeros otherwise
// (checkpoint loading builds the shapes first and fills them from the file).
template <typename T>
Tensor<T> init_weight(Shape shape, Rng* rng) {
    if (!rng) return Tensor<T>::zeros(std::move(shape));
    return random_truncated_normal<T>(std::move(shape), *rng, T(kInitStd));
}

}  // namespace detail

template <typename T>
struct LayerNormParams {
    Tensor<T> gamma, beta;

    static LayerNormParams make(int64_t d) { return {Tensor<T>::ones({d}), Tensor<T>::zeros({d})}; }
};

template <typename T>
struct AttentionParams {
    Tensor<T> w_query, b_query, w_key, b_key, w_value, b_value, w_out, b_out;
    int64_t heads = 1;

    static AttentionParams init(int64_t dim, int64_t heads, Rng& rng) { return build(dim, heads, &rng); }
    static AttentionParams zeros(int64_t dim, int64_t heads) { return build(dim, heads, nullptr); }

    static AttentionParams build(int64_t dim, int64_t heads, Rng* rng) {
        if (heads < 1 || dim % heads != 0) {
            throw ConfigError("model dim " + std::to_string(dim) + " is not divisible by heads " +
                              std::to_string(heads));
        }
        AttentionParams p;
        p.heads = heads;
        p.w_query = detail::init_weight<T>({dim, dim}, rng);
        p.b_query = Tensor<T>::zeros({dim});
        p.w_key = detail::init_weight<T>({dim, dim}, rng);
        p.b_key = Tensor<T>::zeros({dim});
        p.w_value = detail::init_weight<T>({dim, dim}, rng);
        p.b_value = Tensor<T>::zeros({dim});
        p.w_out = detail::init_weight<T>({dim, dim}, rng);
        p.b_out = Tensor<T>::zeros({dim});
        return p;
    }
};

template <typename T>
struct SwiGluParams {
    Tensor<T> w_gate, b_gate, w_value, b_value, w_out, b_out;

    static SwiGluParams init(int64_t dim, int64_t hidden, Rng& rng) { return build(dim, hidden, &rng); }

    static SwiGluParams build(int64_t dim, int64_t hidden, Rng* rng) {
        SwiGluParams p;
        p.w_gate = detail::init_weight<T>({dim, hidden}, rng);
        p.b_gate = Tensor<T>::zeros({hidden});
        p.w_value = detail::init_weight<T>({dim, hidden}, rng);
        p.b_value = Tensor<T>::zeros({hidden});
        p.w_out = detail::init_weight<T>({hidden, dim}, rng);
        p.b_out = Tensor<T>::zeros({dim});
        return p;
    }
};

template <typename T>
struct MlpParams {
    Tensor<T> w_in, b_in, w_out, b_out;

    static MlpParams init(int64_t dim, int64_t swiglu_hidden, Rng& rng) { return build(dim, swiglu_hidden, &rng); }

    static MlpParams build(int64_t dim, int64_t swiglu_hidden, Rng* rng) {
        const int64_t hidden = mlp_hidden_dim(swiglu_hidden);
        MlpParams p;
        p.w_in = detail::init_weight<T>({dim, hidden}, rng);
        p.b_in = Tensor<T>::zeros({hidden});
        p.w_out = detail::init_weight<T>({hidden, dim}, rng);
        p.b_out = Tensor<T>::zeros({dim});
        return p;
    }
};

// One Gated Transformer Block: pre-LN attention and pre-LN feed-forward,
// each inside a residual branch.
template <typename T>
struct GtbParams {
    LayerNormParams<T> ln1, ln2;
    AttentionParams<T> attn;
    std::variant<SwiGluParams<T>, MlpParams<T>> ffn;

    static GtbParams init(int64_t dim, int64_t heads, int64_t hidden, FfnKind kind, Rng& rng) {
        return build(dim, heads, hidden, kind, &rng);
    }

    static GtbParams build(int64_t dim, int64_t heads, int64_t hidden, FfnKind kind, Rng* rng) {
        GtbParams p;
        p.ln1 = LayerNormParams<T>::make(dim);
        p.ln2 = LayerNormParams<T>::make(dim);
        p.attn = AttentionParams<T>::build(dim, heads, rng);
        if (kind == FfnKind::SwiGlu) {
            p.ffn = SwiGluParams<T>::build(dim, hidden, rng);
        } else {
            p.ffn = MlpParams<T>::build(dim, hidden, rng);
        }
        return p;
    }
};

// ---------------------------------------------------------------------------
// Forward building blocks
// ---------------------------------------------------------------------------

// y = x @ w + b applied over the last axis; leading dims are flattened into
// one matmul so the whole batch hits a single kernel call.
template <typename T>
Value<T> linear(Tape<T>& tp, const Value<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    const Shape& xs = x.shape();
    const int64_t d_in = xs.back();
    if (w.ndim() != 2 || w.dim(0) != d_in) {
        throw ShapeError("linear: weight " + shape_str(w.shape()) + " does not match input " + shape_str(xs));
    }
    const int64_t rows = x.data.numel() / d_in;
    Value<T> x2 = reshape(tp, x, {rows, d_in});
    Value<T> y2 = matmul(tp, x2, tp.param(w));
    y2 = add_broadcast(tp, y2, tp.param(b));
    Shape out_shape(xs);
    out_shape.back() = w.dim(1);
    return reshape(tp, y2, std::move(out_shape));
}

template <typename T>
Value<T> layer_norm(Tape<T>& tp, const Value<T>& x, const LayerNormParams<T>& p, T eps = T(kLayerNormEps)) {
    return layer_norm(tp, x, tp.param(p.gamma), tp.param(p.beta), eps);
}

// Inverted-scale dropout; identity in eval mode.
template <typename T>
Value<T> dropout(Tape<T>& tp, const Value<T>& x, double p, Mode mode, Rng& rng) {
    if (mode == Mode::Eval || p <= 0.0) return x;
    if (p >= 1.0) throw ConfigError("dropout probability must be < 1");
    Tensor<T> mask(x.shape());
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    for (T& m : mask.mut_data()) m = rng.uniform() < p ? T(0) : keep_scale;
    return mul_mask(tp, x, mask);
}

// Stochastic depth over the leading (sample) axis: the whole residual branch
// of a sample is zeroed with probability p and survivors are rescaled.
// The linear schedule ramps p from 0 at the first block to `rate` at the
// last; the uniform schedule applies `rate` everywhere.
template <typename T>
Value<T> drop_path(Tape<T>& tp, const Value<T>& x, double rate, DropSchedule schedule, int64_t block_index,
                   int64_t total_blocks, Mode mode, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("drop_path rate must lie in [0,1)");
    if (mode == Mode::Eval || rate == 0.0) return x;
    double p = rate;
    if (schedule == DropSchedule::Linear) {
        p = total_blocks > 1 ? rate * static_cast<double>(block_index) / static_cast<double>(total_blocks - 1)
                             : 0.0;
    }
    if (p <= 0.0) return x;
    Tensor<T> factors({x.data.dim(0)});
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    for (T& f : factors.mut_data()) f = rng.uniform() < p ? T(0) : keep_scale;
    return scale_rows(tp, x, factors);
}

// Multi-head self-attention with 1/sqrt(head_dim) scaling. Input is
// [..., L, D]; every leading axis is treated as batch.
template <typename T>
Value<T> mhsa(Tape<T>& tp, const Value<T>& x, const AttentionParams<T>& p, const DropSpec& drop, Rng& rng) {
    const Shape& xs = x.shape();
    if (xs.size() < 2) throw ShapeError("mhsa: input rank must be >= 2, got " + shape_str(xs));
    const int64_t d = xs.back();
    const int64_t len = xs[xs.size() - 2];
    const int64_t groups = x.data.numel() / (len * d);
    if (d % p.heads != 0) {
        throw ConfigError("mhsa: dim " + std::to_string(d) + " not divisible by heads " + std::to_string(p.heads));
    }
    const int64_t head_dim = d / p.heads;
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim)));

    Value<T> x3 = reshape(tp, x, {groups, len, d});
    Value<T> q = linear(tp, x3, p.w_query, p.b_query);
    Value<T> k = linear(tp, x3, p.w_key, p.b_key);
    Value<T> v = linear(tp, x3, p.w_value, p.b_value);

    auto to_heads = [&](const Value<T>& t) {
        Value<T> r = reshape(tp, t, {groups, len, p.heads, head_dim});
        r = permute(tp, r, {0, 2, 1, 3});
        return reshape(tp, r, {groups * p.heads, len, head_dim});
    };
    q = to_heads(q);
    k = to_heads(k);
    v = to_heads(v);

    Value<T> scores = mul_scalar(tp, matmul(tp, q, transpose_last2(tp, k)), scale);
    Value<T> weights = softmax_lastdim(tp, scores);
    weights = dropout(tp, weights, drop.attn_dropout, drop.mode, rng);

    Value<T> ctx = matmul(tp, weights, v);
    ctx = reshape(tp, ctx, {groups, p.heads, len, head_dim});
    ctx = permute(tp, ctx, {0, 2, 1, 3});
    ctx = reshape(tp, ctx, {groups, len, d});

    Value<T> out = linear(tp, ctx, p.w_out, p.b_out);
    return reshape(tp, out, xs);
}

// SiLU(x W + b) ⊙ (x V + c), projected back to the model dim. Dropout sits
// after the gated product and after the output projection.
template <typename T>
Value<T> swiglu_ffn(Tape<T>& tp, const Value<T>& x, const SwiGluParams<T>& p, const DropSpec& drop, Rng& rng) {
    Value<T> gate = silu(tp, linear(tp, x, p.w_gate, p.b_gate));
    Value<T> val = linear(tp, x, p.w_value, p.b_value);
    Value<T> h = mul(tp, gate, val);
    h = dropout(tp, h, drop.ffn_dropout, drop.mode, rng);
    Value<T> out = linear(tp, h, p.w_out, p.b_out);
    return dropout(tp, out, drop.ffn_dropout, drop.mode, rng);
}

// Two-layer GELU MLP; the parameter-matched ablation alternative to SwiGLU,
// with the same dropout placement.
template <typename T>
Value<T> mlp_ffn(Tape<T>& tp, const Value<T>& x, const MlpParams<T>& p, const DropSpec& drop, Rng& rng) {
    Value<T> h = gelu(tp, linear(tp, x, p.w_in, p.b_in));
    h = dropout(tp, h, drop.ffn_dropout, drop.mode, rng);
    Value<T> out = linear(tp, h, p.w_out, p.b_out);
    return dropout(tp, out, drop.ffn_dropout, drop.mode, rng);
}

template <typename T>
Value<T> ffn_forward(Tape<T>& tp, const Value<T>& x, const std::variant<SwiGluParams<T>, MlpParams<T>>& p,
                     const DropSpec& drop, Rng& rng) {
    return std::visit(
        [&](const auto& params) {
            if constexpr (std::is_same_v<std::decay_t<decltype(params)>, SwiGluParams<T>>) {
                return swiglu_ffn(tp, x, params, drop, rng);
            } else {
                return mlp_ffn(tp, x, params, drop, rng);
            }
        },
        p);
}

// Y = MSA(LN(Z)) + Z ; Z' = FFN(LN(Y)) + Y, with stochastic depth wrapping
// each residual branch.
template <typename T>
Value<T> gtb_forward(Tape<T>& tp, const Value<T>& x, const GtbParams<T>& p, const DropSpec& drop,
                     int64_t block_index, int64_t total_blocks, Rng& rng) {
    drop.validate();
    Value<T> attn_branch = mhsa(tp, layer_norm(tp, x, p.ln1), p.attn, drop, rng);
    attn_branch =
        drop_path(tp, attn_branch, drop.drop_path_rate, drop.schedule, block_index, total_blocks, drop.mode, rng);
    Value<T> y = add(tp, x, attn_branch);

    Value<T> ffn_branch = ffn_forward(tp, layer_norm(tp, y, p.ln2), p.ffn, drop, rng);
    ffn_branch =
        drop_path(tp, ffn_branch, drop.drop_path_rate, drop.schedule, block_index, total_blocks, drop.mode, rng);
    return add(tp, y, ffn_branch);
}

}  // namespace predformer

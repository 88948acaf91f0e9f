#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "predformer/cost.hpp"
#include "predformer/model.hpp"

namespace predformer {

struct PixelMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

// Means over all elements, accumulated in f64; rmse = sqrt(mse).
template <typename T>
PixelMetrics pixel_metrics(const Tensor<T>& pred, const Tensor<T>& target) {
    check_same_shape(pred, target, "pixel_metrics");
    auto p = pred.data();
    auto t = target.data();
    double se = 0.0, ae = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
        se += d * d;
        ae += std::abs(d);
    }
    PixelMetrics m;
    m.mse = se / static_cast<double>(p.size());
    m.mae = ae / static_cast<double>(p.size());
    m.rmse = std::sqrt(m.mse);
    return m;
}

// ---------------------------------------------------------------------------
// SSIM
// ---------------------------------------------------------------------------

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr double kSsimRange = 1.0;  // dynamic range of [0,1] frames

namespace detail {

inline const std::vector<double>& ssim_kernel() {
    static const std::vector<double> kernel = [] {
        std::vector<double> k1d(kSsimWindow);
        double sum = 0.0;
        for (int i = 0; i < kSsimWindow; ++i) {
            const double d = static_cast<double>(i - kSsimWindow / 2);
            k1d[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
            sum += k1d[static_cast<size_t>(i)];
        }
        for (auto& v : k1d) v /= sum;
        std::vector<double> k2d(static_cast<size_t>(kSsimWindow) * kSsimWindow);
        for (int r = 0; r < kSsimWindow; ++r)
            for (int c = 0; c < kSsimWindow; ++c)
                k2d[static_cast<size_t>(r * kSsimWindow + c)] =
                    k1d[static_cast<size_t>(r)] * k1d[static_cast<size_t>(c)];
        return k2d;
    }();
    return kernel;
}

// Mean local SSIM of two single-channel H x W planes over all fully-interior
// (valid) 11x11 Gaussian windows.
template <typename T>
double ssim_plane(const T* a, const T* b, int64_t height, int64_t width) {
    if (height < kSsimWindow || width < kSsimWindow) {
        throw ShapeError("ssim: frame " + std::to_string(height) + "x" + std::to_string(width) +
                         " is smaller than the " + std::to_string(kSsimWindow) + "x" +
                         std::to_string(kSsimWindow) + " window");
    }
    const auto& w = ssim_kernel();
    const double c1 = (kSsimK1 * kSsimRange) * (kSsimK1 * kSsimRange);
    const double c2 = (kSsimK2 * kSsimRange) * (kSsimK2 * kSsimRange);
    double total = 0.0;
    int64_t windows = 0;
    for (int64_t i = 0; i + kSsimWindow <= height; ++i) {
        for (int64_t j = 0; j + kSsimWindow <= width; ++j) {
            double mu1 = 0.0, mu2 = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
            for (int r = 0; r < kSsimWindow; ++r) {
                const T* ar = a + (i + r) * width + j;
                const T* br = b + (i + r) * width + j;
                const double* wr = w.data() + r * kSsimWindow;
                for (int c = 0; c < kSsimWindow; ++c) {
                    const double x = static_cast<double>(ar[c]);
                    const double y = static_cast<double>(br[c]);
                    mu1 += wr[c] * x;
                    mu2 += wr[c] * y;
                    xx += wr[c] * x * x;
                    yy += wr[c] * y * y;
                    xy += wr[c] * x * y;
                }
            }
            const double var1 = xx - mu1 * mu1;
            const double var2 = yy - mu2 * mu2;
            const double cov = xy - mu1 * mu2;
            total += ((2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)) /
                     ((mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

}  // namespace detail

// Mean SSIM over every trailing H x W plane of the input (channels, frames
// and batch entries are averaged with equal weight).
template <typename T>
double ssim(const Tensor<T>& pred, const Tensor<T>& target) {
    check_same_shape(pred, target, "ssim");
    if (pred.ndim() < 2) throw ShapeError("ssim: input must have at least 2 dims, got " + shape_str(pred.shape()));
    const int64_t width = pred.dim(pred.ndim() - 1);
    const int64_t height = pred.dim(pred.ndim() - 2);
    const int64_t planes = pred.numel() / (height * width);
    const T* a = pred.data().data();
    const T* b = target.data().data();
    double total = 0.0;
    for (int64_t p = 0; p < planes; ++p) {
        total += detail::ssim_plane(a + p * height * width, b + p * height * width, height, width);
    }
    return total / static_cast<double>(planes);
}

// 10 log10(1 / mse) on [0,1] frames; capped at 99.0 (the serialized stand-in
// for infinity when mse = 0).
inline double psnr_from_mse(double mse) {
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

template <typename T>
double psnr(const Tensor<T>& pred, const Tensor<T>& target) {
    return psnr_from_mse(pixel_metrics(pred, target).mse);
}

// ---------------------------------------------------------------------------
// Evaluation report data
// ---------------------------------------------------------------------------

struct MetricsReport {
    std::string run_id;
    std::string variant;
    int64_t layers = 0;
    int64_t params = 0;
    int64_t flops = 0;
    double fps = 0.0;
    double mse = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    double ssim = 0.0;
    double psnr = 0.0;
    std::vector<double> per_frame_mse;
    std::vector<double> per_frame_mae;
    std::vector<double> per_frame_ssim;
    std::string config_fingerprint;
    std::string timestamp;
};

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// Sequence-level metrics plus the per-frame breakdown (mean over the batch
// at each time step). Inputs are [B, T', C, H, W] in [0, 1].
template <typename T>
MetricsReport evaluate_predictions(const Tensor<T>& pred, const Tensor<T>& target) {
    check_same_shape(pred, target, "evaluate_predictions");
    if (pred.ndim() != 5) {
        throw ShapeError("evaluate_predictions: expected [B,T,C,H,W], got " + shape_str(pred.shape()));
    }
    MetricsReport r;
    const PixelMetrics m = pixel_metrics(pred, target);
    r.mse = m.mse;
    r.mae = m.mae;
    r.rmse = m.rmse;
    r.ssim = ssim(pred, target);
    r.psnr = psnr_from_mse(m.mse);
    r.timestamp = iso_timestamp();

    const int64_t B = pred.dim(0), Tn = pred.dim(1);
    const int64_t frame_sz = pred.numel() / (B * Tn);
    const Shape frame_shape(pred.shape().begin() + 2, pred.shape().end());
    for (int64_t t = 0; t < Tn; ++t) {
        double se = 0.0, ae = 0.0, ss = 0.0;
        for (int64_t b = 0; b < B; ++b) {
            const T* pp = pred.data().data() + (b * Tn + t) * frame_sz;
            const T* tp = target.data().data() + (b * Tn + t) * frame_sz;
            for (int64_t i = 0; i < frame_sz; ++i) {
                const double d = static_cast<double>(pp[i]) - static_cast<double>(tp[i]);
                se += d * d;
                ae += std::abs(d);
            }
            const int64_t hw = pred.dim(3) * pred.dim(4);
            for (int64_t c = 0; c < pred.dim(2); ++c) {
                ss += detail::ssim_plane(pp + c * hw, tp + c * hw, pred.dim(3), pred.dim(4));
            }
        }
        const double denom = static_cast<double>(B * frame_sz);
        r.per_frame_mse.push_back(se / denom);
        r.per_frame_mae.push_back(ae / denom);
        r.per_frame_ssim.push_back(ss / static_cast<double>(B * pred.dim(2)));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Throughput
// ---------------------------------------------------------------------------

struct BenchResult {
    int64_t param_count = 0;
    int64_t flops_per_sample = 0;
    double fps = 0.0;
    int64_t batch = 1;
    int64_t warmup_iters = 3;
    int64_t timed_iters = 10;
};

// Median-of-3 eval-mode throughput in predicted frames per second. The
// evaluation is pinned to one thread for stable timing.
template <typename T>
BenchResult fps_bench(const ModelConfig& cfg, ModelParams<T>& params, int64_t batch, int64_t warmup_iters,
                      int64_t timed_iters) {
    if (warmup_iters < 3) throw ConfigError("fps_bench: warmup iterations must be >= 3");
    if (timed_iters < 10) throw ConfigError("fps_bench: timed iterations must be >= 10");
    if (batch < 1) throw ConfigError("fps_bench: batch must be >= 1");
#ifdef _OPENMP
    const int prev_threads = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    Rng rng(42);
    Tensor<T> context = random_uniform<T>({batch, cfg.t_in, cfg.channels, cfg.height, cfg.width}, rng);
    Rng drop_rng(0);
    auto run_once = [&] {
        Tape<T> tp(false);
        (void)model_forward(tp, Value<T>(context), cfg, params, Mode::Eval, drop_rng);
    };
    for (int64_t i = 0; i < warmup_iters; ++i) run_once();

    std::vector<double> rates;
    for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int64_t i = 0; i < timed_iters; ++i) run_once();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rates.push_back(static_cast<double>(timed_iters * batch * cfg.t_out) / secs);
    }
    std::sort(rates.begin(), rates.end());
#ifdef _OPENMP
    omp_set_num_threads(prev_threads);
#endif
    BenchResult r;
    r.param_count = count_params(cfg);
    r.flops_per_sample = estimate_flops(cfg);
    r.fps = rates[1];
    r.batch = batch;
    r.warmup_iters = warmup_iters;
    r.timed_iters = timed_iters;
    return r;
}

}  // namespace predformer

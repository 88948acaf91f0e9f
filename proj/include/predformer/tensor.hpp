#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "predformer/errors.hpp"
#include "predformer/rng.hpp"

namespace predformer {

using Shape = std::vector<int64_t>;

inline int64_t numel_of(const Shape& shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

inline void check_shape_valid(const Shape& shape) {
    for (int64_t d : shape) {
        if (d < 1) throw ShapeError("invalid tensor shape " + shape_str(shape) + ": all axis lengths must be >= 1");
    }
}

// Dense n-dimensional array with row-major contiguous storage. Storage is
// shared between copies and unshared on first mutable access, so passing
// tensors around (including saving them for the backward pass) is cheap.
// A default-constructed Tensor has no storage; every factory and operation
// produces a defined one. Rank-0 tensors hold a single scalar.
template <typename T>
class Tensor {
    static_assert(std::is_floating_point_v<T>, "Tensor supports f32/f64 only");

public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)) {
        check_shape_valid(shape_);
        data_ = std::make_shared<std::vector<T>>(static_cast<size_t>(numel_of(shape_)), T(0));
    }

    Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)) {
        check_shape_valid(shape_);
        if (static_cast<int64_t>(values.size()) != numel_of(shape_)) {
            throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                             shape_str(shape_));
        }
        data_ = std::make_shared<std::vector<T>>(std::move(values));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T value) {
        Tensor t(std::move(shape));
        std::fill(t.mut().begin(), t.mut().end(), value);
        return t;
    }

    static Tensor ones(Shape shape) { return full(std::move(shape), T(1)); }

    static Tensor scalar(T value) { return Tensor(Shape{}, std::vector<T>{value}); }

    bool defined() const { return static_cast<bool>(data_); }
    const Shape& shape() const { return shape_; }
    int64_t ndim() const { return static_cast<int64_t>(shape_.size()); }
    int64_t dim(int64_t i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }

    std::span<const T> data() const { return {data_->data(), data_->size()}; }
    std::span<T> mut_data() { return {mut().data(), mut().size()}; }

    // True when this tensor and `other` share the same storage object.
    bool shares_storage_with(const Tensor& other) const { return data_ == other.data_; }

    // Identity of the underlying storage; used to key parameters on a tape.
    const void* storage_key() const { return data_.get(); }

    T item() const {
        if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
        return (*data_)[0];
    }

    T at(const std::vector<int64_t>& idx) const {
        return (*data_)[static_cast<size_t>(flat_index(idx))];
    }

    void set(const std::vector<int64_t>& idx, T value) {
        mut()[static_cast<size_t>(flat_index(idx))] = value;
    }

    // Same storage, different shape; element count must match.
    Tensor reshaped(Shape new_shape) const {
        check_shape_valid(new_shape);
        if (numel_of(new_shape) != numel()) {
            throw ShapeError("cannot reshape " + shape_str(shape_) + " into " + shape_str(new_shape) +
                             ": element counts differ");
        }
        Tensor t;
        t.shape_ = std::move(new_shape);
        t.data_ = data_;
        return t;
    }

    template <typename U>
    Tensor<U> astype() const {
        std::vector<U> out(data_->size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>((*data_)[i]);
        return Tensor<U>(shape_, std::move(out));
    }

    bool all_finite() const {
        for (T v : *data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

private:
    std::vector<T>& mut() {
        if (!data_) throw Error("mutating an undefined tensor");
        if (data_.use_count() > 1) data_ = std::make_shared<std::vector<T>>(*data_);
        return *data_;
    }

    int64_t flat_index(const std::vector<int64_t>& idx) const {
        if (static_cast<int64_t>(idx.size()) != ndim()) {
            throw ShapeError("index rank " + std::to_string(idx.size()) + " does not match shape " +
                             shape_str(shape_));
        }
        int64_t flat = 0;
        for (size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= shape_[i]) throw ShapeError("index out of range in shape " + shape_str(shape_));
            flat = flat * shape_[i] + idx[i];
        }
        return flat;
    }

    Shape shape_;
    std::shared_ptr<std::vector<T>> data_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

inline Shape leading_dims(const Shape& s, int64_t drop_trailing) {
    return Shape(s.begin(), s.end() - drop_trailing);
}

// c[M,P] += a[M,K] * b[K,P]; rows of c are processed four at a time so each
// row of b is loaded once per block. Accumulation order over k is fixed per
// output element, so results do not depend on the thread count.
template <typename T>
void mm_block_nn(const T* a, const T* b, T* c, int64_t m0, int64_t m1, int64_t K, int64_t P) {
    int64_t i = m0;
    for (; i + 4 <= m1; i += 4) {
        T* c0 = c + i * P;
        T* c1 = c0 + P;
        T* c2 = c1 + P;
        T* c3 = c2 + P;
        const T* a0 = a + i * K;
        const T* a1 = a0 + K;
        const T* a2 = a1 + K;
        const T* a3 = a2 + K;
        for (int64_t k = 0; k < K; ++k) {
            const T* bk = b + k * P;
            const T a0k = a0[k], a1k = a1[k], a2k = a2[k], a3k = a3[k];
            for (int64_t j = 0; j < P; ++j) {
                c0[j] += a0k * bk[j];
                c1[j] += a1k * bk[j];
                c2[j] += a2k * bk[j];
                c3[j] += a3k * bk[j];
            }
        }
    }
    for (; i < m1; ++i) {
        T* ci = c + i * P;
        const T* ai = a + i * K;
        for (int64_t k = 0; k < K; ++k) {
            const T* bk = b + k * P;
            const T aik = ai[k];
            for (int64_t j = 0; j < P; ++j) ci[j] += aik * bk[j];
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and broadcast kernels
// ---------------------------------------------------------------------------

template <typename T, typename F>
Tensor<T> elementwise_unary(const Tensor<T>& x, F f) {
    Tensor<T> out(x.shape());
    auto xi = x.data();
    auto oi = out.mut_data();
    for (size_t i = 0; i < xi.size(); ++i) oi[i] = f(xi[i]);
    return out;
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " differ");
    }
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "add");
    Tensor<T> out(a.shape());
    auto ai = a.data();
    auto bi = b.data();
    auto oi = out.mut_data();
    for (size_t i = 0; i < ai.size(); ++i) oi[i] = ai[i] + bi[i];
    return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "sub");
    Tensor<T> out(a.shape());
    auto ai = a.data();
    auto bi = b.data();
    auto oi = out.mut_data();
    for (size_t i = 0; i < ai.size(); ++i) oi[i] = ai[i] - bi[i];
    return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "mul");
    Tensor<T> out(a.shape());
    auto ai = a.data();
    auto bi = b.data();
    auto oi = out.mut_data();
    for (size_t i = 0; i < ai.size(); ++i) oi[i] = ai[i] * bi[i];
    return out;
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& a, T s) {
    return elementwise_unary(a, [s](T v) { return v * s; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
    return elementwise_unary(a, [s](T v) { return v + s; });
}

// x + v where v's shape equals the trailing dims of x; v is tiled over the
// leading dims (bias add, positional-encoding add).
template <typename T>
Tensor<T> add_broadcast(const Tensor<T>& x, const Tensor<T>& v) {
    const int64_t vr = v.ndim();
    detail::require(vr <= x.ndim(), "add_broadcast: rhs rank exceeds lhs rank");
    for (int64_t i = 0; i < vr; ++i) {
        if (v.dim(i) != x.dim(x.ndim() - vr + i)) {
            throw ShapeError("add_broadcast: trailing dims of " + shape_str(x.shape()) + " do not match " +
                             shape_str(v.shape()));
        }
    }
    const int64_t inner = v.numel();
    const int64_t outer = x.numel() / inner;
    Tensor<T> out(x.shape());
    auto xi = x.data();
    auto vi = v.data();
    auto oi = out.mut_data();
    for (int64_t o = 0; o < outer; ++o) {
        const T* xp = xi.data() + o * inner;
        T* op = oi.data() + o * inner;
        for (int64_t i = 0; i < inner; ++i) op[i] = xp[i] + vi[i];
    }
    return out;
}

// Reduction matching add_broadcast: sums g over its leading dims down to
// `target_shape` (the broadcast rhs shape). Accumulates in double.
template <typename T>
Tensor<T> sum_to_trailing(const Tensor<T>& g, const Shape& target_shape) {
    const int64_t inner = numel_of(target_shape);
    detail::require(g.numel() % inner == 0, "sum_to_trailing: sizes do not divide");
    const int64_t outer = g.numel() / inner;
    std::vector<double> acc(static_cast<size_t>(inner), 0.0);
    auto gi = g.data();
    for (int64_t o = 0; o < outer; ++o) {
        const T* gp = gi.data() + o * inner;
        for (int64_t i = 0; i < inner; ++i) acc[static_cast<size_t>(i)] += static_cast<double>(gp[i]);
    }
    Tensor<T> out(target_shape);
    auto oi = out.mut_data();
    for (int64_t i = 0; i < inner; ++i) oi[static_cast<size_t>(i)] = static_cast<T>(acc[static_cast<size_t>(i)]);
    return out;
}

// y[i, ...] = x[i, ...] * s[i]; per-sample scaling used by stochastic depth.
template <typename T>
Tensor<T> scale_rows(const Tensor<T>& x, const Tensor<T>& s) {
    detail::require(s.ndim() == 1 && x.ndim() >= 1 && s.dim(0) == x.dim(0),
                    "scale_rows: scale shape " + shape_str(s.shape()) + " does not match leading axis of " +
                        shape_str(x.shape()));
    const int64_t rows = x.dim(0);
    const int64_t inner = x.numel() / rows;
    Tensor<T> out(x.shape());
    auto xi = x.data();
    auto si = s.data();
    auto oi = out.mut_data();
    for (int64_t r = 0; r < rows; ++r) {
        const T f = si[static_cast<size_t>(r)];
        const T* xp = xi.data() + r * inner;
        T* op = oi.data() + r * inner;
        for (int64_t i = 0; i < inner; ++i) op[i] = xp[i] * f;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matrix multiplication (batched, equal leading dims)
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require(a.ndim() >= 2 && b.ndim() >= 2, "matmul: operands must have rank >= 2");
    if (a.ndim() != b.ndim() ||
        !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin(), b.shape().end() - 2)) {
        throw ShapeError("matmul: leading dims of " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " differ");
    }
    const int64_t M = a.dim(a.ndim() - 2);
    const int64_t K = a.dim(a.ndim() - 1);
    const int64_t Kb = b.dim(b.ndim() - 2);
    const int64_t P = b.dim(b.ndim() - 1);
    if (K != Kb) {
        throw ShapeError("matmul: inner dims of " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " do not conform");
    }
    Shape out_shape(a.shape());
    out_shape[out_shape.size() - 2] = M;
    out_shape[out_shape.size() - 1] = P;
    Tensor<T> out(out_shape);

    const int64_t batches = a.numel() / (M * K);
    const T* ap = a.data().data();
    const T* bp = b.data().data();
    T* cp = out.mut_data().data();

    const int64_t row_blocks = (M + 3) / 4;
    const int64_t total_blocks = batches * row_blocks;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (total_blocks > 1)
#endif
    for (int64_t t = 0; t < total_blocks; ++t) {
        const int64_t batch = t / row_blocks;
        const int64_t m0 = (t % row_blocks) * 4;
        const int64_t m1 = std::min<int64_t>(m0 + 4, M);
        detail::mm_block_nn(ap + batch * M * K, bp + batch * K * P, cp + batch * M * P, m0, m1, K, P);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Permute / transpose
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> transpose_last2(const Tensor<T>& x) {
    detail::require(x.ndim() >= 2, "transpose_last2: rank must be >= 2");
    const int64_t R = x.dim(x.ndim() - 2);
    const int64_t C = x.dim(x.ndim() - 1);
    Shape out_shape(x.shape());
    std::swap(out_shape[out_shape.size() - 2], out_shape[out_shape.size() - 1]);
    Tensor<T> out(out_shape);
    const int64_t batches = x.numel() / (R * C);
    const T* xp = x.data().data();
    T* op = out.mut_data().data();
    for (int64_t b = 0; b < batches; ++b) {
        const T* xb = xp + b * R * C;
        T* ob = op + b * R * C;
        for (int64_t r = 0; r < R; ++r)
            for (int64_t c = 0; c < C; ++c) ob[c * R + r] = xb[r * C + c];
    }
    return out;
}

inline bool is_valid_permutation(const std::vector<int64_t>& axes, int64_t rank) {
    if (static_cast<int64_t>(axes.size()) != rank) return false;
    std::vector<bool> seen(static_cast<size_t>(rank), false);
    for (int64_t a : axes) {
        if (a < 0 || a >= rank || seen[static_cast<size_t>(a)]) return false;
        seen[static_cast<size_t>(a)] = true;
    }
    return true;
}

inline std::vector<int64_t> inverse_permutation(const std::vector<int64_t>& axes) {
    std::vector<int64_t> inv(axes.size());
    for (size_t i = 0; i < axes.size(); ++i) inv[static_cast<size_t>(axes[i])] = static_cast<int64_t>(i);
    return inv;
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<int64_t>& axes) {
    const int64_t rank = x.ndim();
    if (!is_valid_permutation(axes, rank)) {
        throw ShapeError("permute: invalid axes for shape " + shape_str(x.shape()));
    }
    // Fast path: identity on all but the last two axes.
    bool swap_last2 = rank >= 2;
    for (int64_t i = 0; i < rank - 2 && swap_last2; ++i) swap_last2 = (axes[static_cast<size_t>(i)] == i);
    if (swap_last2 && rank >= 2 && axes[static_cast<size_t>(rank - 2)] == rank - 1 &&
        axes[static_cast<size_t>(rank - 1)] == rank - 2) {
        return transpose_last2(x);
    }
    bool identity = true;
    for (int64_t i = 0; i < rank; ++i) identity = identity && axes[static_cast<size_t>(i)] == i;
    if (identity) return x;

    Shape out_shape(static_cast<size_t>(rank));
    for (int64_t i = 0; i < rank; ++i) out_shape[static_cast<size_t>(i)] = x.dim(axes[static_cast<size_t>(i)]);
    Tensor<T> out(out_shape);

    std::vector<int64_t> in_strides(static_cast<size_t>(rank), 1);
    for (int64_t i = rank - 2; i >= 0; --i) in_strides[static_cast<size_t>(i)] = in_strides[static_cast<size_t>(i + 1)] * x.dim(i + 1);
    // Stride of the input along each *output* axis.
    std::vector<int64_t> strides(static_cast<size_t>(rank));
    for (int64_t i = 0; i < rank; ++i) strides[static_cast<size_t>(i)] = in_strides[static_cast<size_t>(axes[static_cast<size_t>(i)])];

    const T* xp = x.data().data();
    T* op = out.mut_data().data();
    const int64_t n = x.numel();
    std::vector<int64_t> counter(static_cast<size_t>(rank), 0);
    int64_t in_off = 0;
    for (int64_t flat = 0; flat < n; ++flat) {
        op[flat] = xp[in_off];
        for (int64_t axis = rank - 1; axis >= 0; --axis) {
            auto ai = static_cast<size_t>(axis);
            if (++counter[ai] < out_shape[ai]) {
                in_off += strides[ai];
                break;
            }
            counter[ai] = 0;
            in_off -= strides[ai] * (out_shape[ai] - 1);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Activations, softmax, layer norm, reductions
// ---------------------------------------------------------------------------

template <typename T>
T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
Tensor<T> silu(const Tensor<T>& x) {
    return elementwise_unary(x, [](T v) { return v * sigmoid(v); });
}

// d/dx [x * sigmoid(x)] = sigmoid(x) * (1 + x * (1 - sigmoid(x)))
template <typename T>
Tensor<T> silu_grad(const Tensor<T>& x) {
    return elementwise_unary(x, [](T v) {
        const T s = sigmoid(v);
        return s * (T(1) + v * (T(1) - s));
    });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
    return elementwise_unary(x, [](T v) {
        return T(0.5) * v * (T(1) + std::erf(v * T(0.7071067811865476)));
    });
}

template <typename T>
Tensor<T> gelu_grad(const Tensor<T>& x) {
    return elementwise_unary(x, [](T v) {
        const T cdf = T(0.5) * (T(1) + std::erf(v * T(0.7071067811865476)));
        const T pdf = T(0.3989422804014327) * std::exp(T(-0.5) * v * v);
        return cdf + v * pdf;
    });
}

// Numerically stabilized softmax over the last axis. Rejects non-finite
// input instead of silently producing NaN rows.
template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& x) {
    detail::require(x.ndim() >= 1, "softmax_lastdim: rank must be >= 1");
    if (!x.all_finite()) throw NumericError("softmax_lastdim: input contains non-finite values");
    const int64_t D = x.dim(x.ndim() - 1);
    const int64_t rows = x.numel() / D;
    Tensor<T> out(x.shape());
    const T* xp = x.data().data();
    T* op = out.mut_data().data();
    for (int64_t r = 0; r < rows; ++r) {
        const T* xr = xp + r * D;
        T* orow = op + r * D;
        T m = xr[0];
        for (int64_t i = 1; i < D; ++i) m = std::max(m, xr[i]);
        double s = 0.0;
        for (int64_t i = 0; i < D; ++i) {
            const T e = std::exp(xr[i] - m);
            orow[i] = e;
            s += static_cast<double>(e);
        }
        const T inv = static_cast<T>(1.0 / s);
        for (int64_t i = 0; i < D; ++i) orow[i] *= inv;
    }
    return out;
}

// Per-slice statistics cached for the backward pass.
template <typename T>
struct LayerNormStats {
    Tensor<T> mean;  // [slices]
    Tensor<T> rstd;  // [slices]
};

template <typename T>
Tensor<T> layer_norm_fwd(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps,
                         LayerNormStats<T>* stats = nullptr) {
    detail::require(x.ndim() >= 1, "layer_norm: rank must be >= 1");
    const int64_t D = x.dim(x.ndim() - 1);
    if (gamma.ndim() != 1 || gamma.dim(0) != D || beta.ndim() != 1 || beta.dim(0) != D) {
        throw ShapeError("layer_norm: gamma " + shape_str(gamma.shape()) + " / beta " + shape_str(beta.shape()) +
                         " do not match last axis of " + shape_str(x.shape()));
    }
    const int64_t slices = x.numel() / D;
    Tensor<T> out(x.shape());
    Tensor<T> mean({slices});
    Tensor<T> rstd({slices});
    const T* xp = x.data().data();
    const T* gp = gamma.data().data();
    const T* bp = beta.data().data();
    T* op = out.mut_data().data();
    T* mp = mean.mut_data().data();
    T* rp = rstd.mut_data().data();
    for (int64_t s = 0; s < slices; ++s) {
        const T* xs = xp + s * D;
        double mu = 0.0;
        for (int64_t i = 0; i < D; ++i) mu += static_cast<double>(xs[i]);
        mu /= static_cast<double>(D);
        double var = 0.0;
        for (int64_t i = 0; i < D; ++i) {
            const double d = static_cast<double>(xs[i]) - mu;
            var += d * d;
        }
        var /= static_cast<double>(D);
        const double r = 1.0 / std::sqrt(var + static_cast<double>(eps));
        mp[s] = static_cast<T>(mu);
        rp[s] = static_cast<T>(r);
        T* os = op + s * D;
        for (int64_t i = 0; i < D; ++i) {
            os[i] = static_cast<T>((static_cast<double>(xs[i]) - mu) * r) * gp[i] + bp[i];
        }
    }
    if (stats) {
        stats->mean = std::move(mean);
        stats->rstd = std::move(rstd);
    }
    return out;
}

template <typename T>
double sum_all_f64(const Tensor<T>& x) {
    double s = 0.0;
    for (T v : x.data()) s += static_cast<double>(v);
    return s;
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
    return Tensor<T>::scalar(static_cast<T>(sum_all_f64(x)));
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
    return Tensor<T>::scalar(static_cast<T>(sum_all_f64(x) / static_cast<double>(x.numel())));
}

template <typename T>
Tensor<T> random_uniform(Shape shape, Rng& rng, T lo = T(0), T hi = T(1)) {
    Tensor<T> t(std::move(shape));
    for (T& v : t.mut_data()) v = lo + static_cast<T>(rng.uniform()) * (hi - lo);
    return t;
}

template <typename T>
Tensor<T> random_normal(Shape shape, Rng& rng, T stddev = T(1)) {
    Tensor<T> t(std::move(shape));
    for (T& v : t.mut_data()) v = static_cast<T>(rng.normal()) * stddev;
    return t;
}

template <typename T>
Tensor<T> random_truncated_normal(Shape shape, Rng& rng, T stddev) {
    Tensor<T> t(std::move(shape));
    for (T& v : t.mut_data()) v = static_cast<T>(rng.truncated_normal(static_cast<double>(stddev)));
    return t;
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) return false;
    return std::memcmp(a.data().data(), b.data().data(), sizeof(T) * static_cast<size_t>(a.numel())) == 0;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    auto ai = a.data();
    auto bi = b.data();
    for (size_t i = 0; i < ai.size(); ++i) m = std::max(m, std::abs(static_cast<double>(ai[i]) - static_cast<double>(bi[i])));
    return m;
}

}  // namespace predformer

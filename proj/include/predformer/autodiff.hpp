#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "predformer/tensor.hpp"

namespace predformer {

template <typename T>
class Tape;

// A tensor plus its position on a tape. node < 0 means the value is a
// constant: it flows through forward computation but receives no gradient.
template <typename T>
struct Value {
    Tensor<T> data;
    int32_t node = -1;

    Value() = default;
    Value(Tensor<T> t) : data(std::move(t)) {}  // NOLINT: implicit constant wrap is intended
    Value(Tensor<T> t, int32_t n) : data(std::move(t)), node(n) {}

    bool tracked() const { return node >= 0; }
    const Shape& shape() const { return data.shape(); }
};

// Append-only reverse-mode tape. Operations record one node each; backward
// replays nodes in strict reverse insertion order. A tape constructed in
// inference mode records nothing and allocates no gradient state. One tape
// serves one forward/backward pair; a second backward() throws.
template <typename T>
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const Tensor<T>& out_grad)>;

    explicit Tape(bool recording = true) : recording_(recording) {}

    static Tape inference() { return Tape(false); }

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return recording_; }
    size_t node_count() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

    // Tracked input that is not memoized (e.g. the tensor a gradient check
    // perturbs).
    Value<T> leaf(const Tensor<T>& t) {
        if (!recording_) return Value<T>(t);
        return Value<T>(t, record(t.shape(), nullptr));
    }

    // Tracked parameter, memoized by storage identity so that the gradient
    // can later be fetched with grad_of() on the same tensor. Parameters
    // never touched by the forward pass keep a zero gradient.
    Value<T> param(const Tensor<T>& t) {
        if (!recording_) return Value<T>(t);
        auto [it, inserted] = param_nodes_.try_emplace(t.storage_key(), 0);
        if (inserted) it->second = record(t.shape(), nullptr);
        return Value<T>(t, it->second);
    }

    void backward(const Value<T>& loss) {
        if (!recording_) throw Error("backward: tape is in inference mode");
        if (consumed_) throw Error("backward: tape already consumed by a previous backward call");
        if (!loss.tracked()) throw Error("backward: loss was not produced under tracking");
        if (loss.data.numel() != 1) {
            throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.data.shape()));
        }
        consumed_ = true;
        accumulate(loss.node, Tensor<T>::ones(loss.data.shape()));
        for (int32_t i = loss.node; i >= 0; --i) {
            Node& n = nodes_[static_cast<size_t>(i)];
            if (n.grad.defined() && n.back) n.back(*this, n.grad);
        }
    }

    // Gradient of a tracked value; zeros if the value never influenced the
    // loss.
    Tensor<T> grad(const Value<T>& v) const {
        if (!v.tracked()) throw Error("grad: value is not tracked on this tape");
        const Tensor<T>& g = nodes_[static_cast<size_t>(v.node)].grad;
        return g.defined() ? g : Tensor<T>::zeros(v.data.shape());
    }

    // Gradient of a parameter registered via param() on this tape.
    Tensor<T> grad_of(const Tensor<T>& p) const {
        auto it = param_nodes_.find(p.storage_key());
        if (it == param_nodes_.end()) return Tensor<T>::zeros(p.shape());
        const Tensor<T>& g = nodes_[static_cast<size_t>(it->second)].grad;
        return g.defined() ? g : Tensor<T>::zeros(p.shape());
    }

    // --- used by the op implementations ---

    int32_t record(Shape out_shape, BackwardFn back) {
        nodes_.push_back(Node{Tensor<T>(), std::move(back), std::move(out_shape)});
        return static_cast<int32_t>(nodes_.size()) - 1;
    }

    void accumulate(int32_t node, const Tensor<T>& delta) {
        if (node < 0) return;
        Node& n = nodes_[static_cast<size_t>(node)];
        if (!n.grad.defined()) n.grad = Tensor<T>::zeros(n.shape);
        check_same_shape(n.grad, delta, "gradient accumulate");
        auto gi = n.grad.mut_data();
        auto di = delta.data();
        for (size_t i = 0; i < gi.size(); ++i) gi[i] += di[i];
    }

private:
    struct Node {
        Tensor<T> grad;  // lazily allocated, same shape as primal
        BackwardFn back; // null for leaves
        Shape shape;
    };

    std::vector<Node> nodes_;
    std::unordered_map<const void*, int32_t> param_nodes_;
    bool recording_ = true;
    bool consumed_ = false;
};

// ---------------------------------------------------------------------------
// Differentiable operations. Each computes the forward result with the
// kernels from tensor.hpp and, when the tape is recording and an input is
// tracked, records a closure implementing the backward rule.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
bool any_tracked(const Tape<T>& tp, std::initializer_list<const Value<T>*> ins) {
    if (!tp.recording()) return false;
    for (const Value<T>* v : ins) {
        if (v->tracked()) return true;
    }
    return false;
}

template <typename T>
Value<T> make_node(Tape<T>& tp, Tensor<T> out, bool tracked, typename Tape<T>::BackwardFn back) {
    if (!tracked) return Value<T>(std::move(out));
    const int32_t n = tp.record(out.shape(), std::move(back));
    return Value<T>(std::move(out), n);
}

}  // namespace detail

template <typename T>
Value<T> add(Tape<T>& tp, const Value<T>& a, const Value<T>& b) {
    Tensor<T> out = add(a.data, b.data);
    const bool tracked = detail::any_tracked(tp, {&a, &b});
    const int32_t an = a.node, bn = b.node;
    return detail::make_node(tp, std::move(out), tracked, [an, bn](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(an, g);
        t.accumulate(bn, g);
    });
}

template <typename T>
Value<T> sub(Tape<T>& tp, const Value<T>& a, const Value<T>& b) {
    Tensor<T> out = sub(a.data, b.data);
    const bool tracked = detail::any_tracked(tp, {&a, &b});
    const int32_t an = a.node, bn = b.node;
    return detail::make_node(tp, std::move(out), tracked, [an, bn](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(an, g);
        if (bn >= 0) t.accumulate(bn, mul_scalar(g, T(-1)));
    });
}

template <typename T>
Value<T> mul(Tape<T>& tp, const Value<T>& a, const Value<T>& b) {
    Tensor<T> out = mul(a.data, b.data);
    const bool tracked = detail::any_tracked(tp, {&a, &b});
    const int32_t an = a.node, bn = b.node;
    Tensor<T> asave = a.data, bsave = b.data;
    return detail::make_node(tp, std::move(out), tracked,
                             [an, bn, asave, bsave](Tape<T>& t, const Tensor<T>& g) {
                                 if (an >= 0) t.accumulate(an, mul(g, bsave));
                                 if (bn >= 0) t.accumulate(bn, mul(g, asave));
                             });
}

template <typename T>
Value<T> mul_scalar(Tape<T>& tp, const Value<T>& a, T s) {
    Tensor<T> out = mul_scalar(a.data, s);
    const bool tracked = detail::any_tracked(tp, {&a});
    const int32_t an = a.node;
    return detail::make_node(tp, std::move(out), tracked, [an, s](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(an, mul_scalar(g, s));
    });
}

// x + v with v tiled over the leading dims of x (bias / positional encoding).
template <typename T>
Value<T> add_broadcast(Tape<T>& tp, const Value<T>& x, const Value<T>& v) {
    Tensor<T> out = add_broadcast(x.data, v.data);
    const bool tracked = detail::any_tracked(tp, {&x, &v});
    const int32_t xn = x.node, vn = v.node;
    const Shape vshape = v.data.shape();
    return detail::make_node(tp, std::move(out), tracked, [xn, vn, vshape](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, g);
        if (vn >= 0) t.accumulate(vn, sum_to_trailing(g, vshape));
    });
}

// Elementwise product with a constant mask (dropout).
template <typename T>
Value<T> mul_mask(Tape<T>& tp, const Value<T>& x, const Tensor<T>& mask) {
    Tensor<T> out = mul(x.data, mask);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    Tensor<T> msave = mask;
    return detail::make_node(tp, std::move(out), tracked, [xn, msave](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, mul(g, msave));
    });
}

// Per-leading-index scaling with constant factors (stochastic depth).
template <typename T>
Value<T> scale_rows(Tape<T>& tp, const Value<T>& x, const Tensor<T>& factors) {
    Tensor<T> out = scale_rows(x.data, factors);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    Tensor<T> fsave = factors;
    return detail::make_node(tp, std::move(out), tracked, [xn, fsave](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, scale_rows(g, fsave));
    });
}

template <typename T>
Value<T> matmul(Tape<T>& tp, const Value<T>& a, const Value<T>& b) {
    Tensor<T> out = matmul(a.data, b.data);
    const bool tracked = detail::any_tracked(tp, {&a, &b});
    const int32_t an = a.node, bn = b.node;
    Tensor<T> asave = a.data, bsave = b.data;
    return detail::make_node(tp, std::move(out), tracked,
                             [an, bn, asave, bsave](Tape<T>& t, const Tensor<T>& g) {
                                 if (an >= 0) t.accumulate(an, matmul(g, transpose_last2(bsave)));
                                 if (bn >= 0) t.accumulate(bn, matmul(transpose_last2(asave), g));
                             });
}

template <typename T>
Value<T> reshape(Tape<T>& tp, const Value<T>& x, Shape new_shape) {
    Tensor<T> out = x.data.reshaped(std::move(new_shape));
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    const Shape in_shape = x.data.shape();
    return detail::make_node(tp, std::move(out), tracked, [xn, in_shape](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, g.reshaped(in_shape));
    });
}

template <typename T>
Value<T> permute(Tape<T>& tp, const Value<T>& x, std::vector<int64_t> axes) {
    Tensor<T> out = permute(x.data, axes);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    const std::vector<int64_t> inv = inverse_permutation(axes);
    return detail::make_node(tp, std::move(out), tracked, [xn, inv](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, permute(g, inv));
    });
}

template <typename T>
Value<T> transpose_last2(Tape<T>& tp, const Value<T>& x) {
    Tensor<T> out = transpose_last2(x.data);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    return detail::make_node(tp, std::move(out), tracked, [xn](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, transpose_last2(g));
    });
}

template <typename T>
Value<T> silu(Tape<T>& tp, const Value<T>& x) {
    Tensor<T> out = silu(x.data);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    Tensor<T> xsave = x.data;
    return detail::make_node(tp, std::move(out), tracked, [xn, xsave](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, mul(g, silu_grad(xsave)));
    });
}

template <typename T>
Value<T> gelu(Tape<T>& tp, const Value<T>& x) {
    Tensor<T> out = gelu(x.data);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    Tensor<T> xsave = x.data;
    return detail::make_node(tp, std::move(out), tracked, [xn, xsave](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, mul(g, gelu_grad(xsave)));
    });
}

template <typename T>
Value<T> softmax_lastdim(Tape<T>& tp, const Value<T>& x) {
    Tensor<T> out = softmax_lastdim(x.data);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    Tensor<T> ysave = out;
    return detail::make_node(tp, std::move(out), tracked, [xn, ysave](Tape<T>& t, const Tensor<T>& g) {
        // dx = y * (g - <g, y>_row)
        const int64_t D = ysave.dim(ysave.ndim() - 1);
        const int64_t rows = ysave.numel() / D;
        Tensor<T> dx(ysave.shape());
        const T* yp = ysave.data().data();
        const T* gp = g.data().data();
        T* dp = dx.mut_data().data();
        for (int64_t r = 0; r < rows; ++r) {
            const T* yr = yp + r * D;
            const T* gr = gp + r * D;
            T* dr = dp + r * D;
            double dot = 0.0;
            for (int64_t i = 0; i < D; ++i) dot += static_cast<double>(gr[i]) * static_cast<double>(yr[i]);
            for (int64_t i = 0; i < D; ++i) dr[i] = yr[i] * (gr[i] - static_cast<T>(dot));
        }
        t.accumulate(xn, dx);
    });
}

template <typename T>
Value<T> layer_norm(Tape<T>& tp, const Value<T>& x, const Value<T>& gamma, const Value<T>& beta, T eps) {
    const bool tracked = detail::any_tracked(tp, {&x, &gamma, &beta});
    LayerNormStats<T> stats;
    Tensor<T> out = layer_norm_fwd(x.data, gamma.data, beta.data, eps, tracked ? &stats : nullptr);
    if (!tracked) return Value<T>(std::move(out));
    const int32_t xn = x.node, gn = gamma.node, bn = beta.node;
    Tensor<T> xsave = x.data, gsave = gamma.data;
    return detail::make_node(
        tp, std::move(out), true, [xn, gn, bn, xsave, gsave, stats](Tape<T>& t, const Tensor<T>& g) {
            const int64_t D = xsave.dim(xsave.ndim() - 1);
            const int64_t slices = xsave.numel() / D;
            const T* xp = xsave.data().data();
            const T* gp = g.data().data();
            const T* gam = gsave.data().data();
            const T* mp = stats.mean.data().data();
            const T* rp = stats.rstd.data().data();

            Tensor<T> dx(xsave.shape());
            T* dxp = dx.mut_data().data();
            std::vector<double> dgamma(static_cast<size_t>(D), 0.0);
            std::vector<double> dbeta(static_cast<size_t>(D), 0.0);

            for (int64_t s = 0; s < slices; ++s) {
                const T* xs = xp + s * D;
                const T* gs = gp + s * D;
                T* ds = dxp + s * D;
                const double mu = static_cast<double>(mp[s]);
                const double r = static_cast<double>(rp[s]);
                double m_dxhat = 0.0, m_dxhat_xhat = 0.0;
                for (int64_t i = 0; i < D; ++i) {
                    const double xhat = (static_cast<double>(xs[i]) - mu) * r;
                    const double dxhat = static_cast<double>(gs[i]) * static_cast<double>(gam[i]);
                    m_dxhat += dxhat;
                    m_dxhat_xhat += dxhat * xhat;
                    dgamma[static_cast<size_t>(i)] += static_cast<double>(gs[i]) * xhat;
                    dbeta[static_cast<size_t>(i)] += static_cast<double>(gs[i]);
                }
                m_dxhat /= static_cast<double>(D);
                m_dxhat_xhat /= static_cast<double>(D);
                for (int64_t i = 0; i < D; ++i) {
                    const double xhat = (static_cast<double>(xs[i]) - mu) * r;
                    const double dxhat = static_cast<double>(gs[i]) * static_cast<double>(gam[i]);
                    ds[i] = static_cast<T>(r * (dxhat - m_dxhat - xhat * m_dxhat_xhat));
                }
            }
            t.accumulate(xn, dx);
            if (gn >= 0 || bn >= 0) {
                Tensor<T> dg({D});
                Tensor<T> db({D});
                auto dgs = dg.mut_data();
                auto dbs = db.mut_data();
                for (int64_t i = 0; i < D; ++i) {
                    dgs[static_cast<size_t>(i)] = static_cast<T>(dgamma[static_cast<size_t>(i)]);
                    dbs[static_cast<size_t>(i)] = static_cast<T>(dbeta[static_cast<size_t>(i)]);
                }
                t.accumulate(gn, dg);
                t.accumulate(bn, db);
            }
        });
}

template <typename T>
Value<T> sum_all(Tape<T>& tp, const Value<T>& x) {
    Tensor<T> out = sum_all(x.data);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    const Shape xshape = x.data.shape();
    return detail::make_node(tp, std::move(out), tracked, [xn, xshape](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, Tensor<T>::full(xshape, g.item()));
    });
}

template <typename T>
Value<T> mean_all(Tape<T>& tp, const Value<T>& x) {
    Tensor<T> out = mean_all(x.data);
    const bool tracked = detail::any_tracked(tp, {&x});
    const int32_t xn = x.node;
    const Shape xshape = x.data.shape();
    const T inv_n = T(1) / static_cast<T>(x.data.numel());
    return detail::make_node(tp, std::move(out), tracked, [xn, xshape, inv_n](Tape<T>& t, const Tensor<T>& g) {
        t.accumulate(xn, Tensor<T>::full(xshape, g.item() * inv_n));
    });
}

// Mean of squared differences; the training objective.
template <typename T>
Value<T> mse_loss(Tape<T>& tp, const Value<T>& pred, const Value<T>& target) {
    check_same_shape(pred.data, target.data, "mse_loss");
    Value<T> d = sub(tp, pred, target);
    return mean_all(tp, mul(tp, d, d));
}

}  // namespace predformer

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "predformer/autodiff.hpp"

namespace predformer {

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
    int64_t elements = 0;
};

// Compares the tape gradient of a scalar-valued function against central
// finite differences, element by element. The error metric is
// |a - n| / max(1, |a|, |n|): relative for large gradients, absolute for
// small ones, so finite-difference noise on near-zero entries does not
// dominate. f must be deterministic (dropout off); this is verified by
// evaluating it twice and comparing bitwise.
template <typename T, typename F>
GradCheckReport grad_check(F&& f, const Tensor<T>& x, T h, double tol) {
    auto eval = [&f](const Tensor<T>& xt) -> T {
        Tape<T> t(false);
        Value<T> out = f(t, Value<T>(xt));
        if (out.data.numel() != 1) {
            throw ShapeError("grad_check: function must return a scalar, got " + shape_str(out.data.shape()));
        }
        return out.data.item();
    };

    const T probe1 = eval(x);
    const T probe2 = eval(x);
    if (!(probe1 == probe2)) {
        throw NumericError("grad_check: function is not deterministic (two evaluations disagree)");
    }

    Tape<T> tape(true);
    Value<T> vx = tape.leaf(x);
    Value<T> loss = f(tape, vx);
    tape.backward(loss);
    const Tensor<T> analytic = tape.grad(vx);

    GradCheckReport report;
    report.elements = x.numel();

    Tensor<T> work = x;                 // copy-on-write duplicate
    auto w = work.mut_data();           // unshared from x now
    auto a = analytic.data();
    for (size_t i = 0; i < w.size(); ++i) {
        const T orig = w[i];
        w[i] = orig + h;
        const double lp = static_cast<double>(eval(work));
        w[i] = orig - h;
        const double lm = static_cast<double>(eval(work));
        w[i] = orig;
        const double numeric = (lp - lm) / (2.0 * static_cast<double>(h));
        const double ai = static_cast<double>(a[i]);
        const double denom = std::max({1.0, std::abs(ai), std::abs(numeric)});
        report.max_rel_err = std::max(report.max_rel_err, std::abs(ai - numeric) / denom);
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

}  // namespace predformer

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "predformer/autodiff.hpp"
#include "predformer/gradcheck.hpp"

using namespace predformer;

namespace {

constexpr double kH = 1e-5;
constexpr double kTol = 1e-4;

// Weighted-sum head so every output element carries a distinct gradient
// (a plain sum would hide permutation and scaling bugs).
template <typename F>
auto weighted(F op, uint64_t seed) {
    return [op, seed](Tape<double>& tp, const Value<double>& x) {
        Value<double> y = op(tp, x);
        Rng rng(seed);
        Tensor<double> w = random_uniform<double>(y.data.shape(), rng, -1.0, 1.0);
        return sum_all(tp, mul_mask(tp, y, w));
    };
}

// Runs grad_check on three input shapes, as the module invariants require.
template <typename F>
void check_shapes(F op, std::initializer_list<Shape> shapes, uint64_t seed = 1234) {
    int idx = 0;
    for (const Shape& shape : shapes) {
        Rng rng(seed + static_cast<uint64_t>(idx));
        Tensor<double> x = random_uniform<double>(shape, rng, -1.5, 1.5);
        const auto report = grad_check(weighted(op, seed + 900 + static_cast<uint64_t>(idx)), x, kH, kTol);
        INFO("shape index ", idx, " max rel err ", report.max_rel_err);
        CHECK(report.pass);
        ++idx;
    }
}

}  // namespace

TEST_CASE("backward of sum is all ones") {
    Tensor<double> x({2, 3}, {1, 2, 3, 4, 5, 6});
    Tape<double> tp;
    Value<double> vx = tp.leaf(x);
    tp.backward(sum_all(tp, vx));
    Tensor<double> g = tp.grad(vx);
    for (double v : g.data()) CHECK(v == 1.0);
}

TEST_CASE("backward of sum of squares is 2x") {
    Tensor<double> x({4}, {1.0, -2.0, 0.5, 3.0});
    Tape<double> tp;
    Value<double> vx = tp.leaf(x);
    tp.backward(sum_all(tp, mul(tp, vx, vx)));
    Tensor<double> g = tp.grad(vx);
    for (int64_t i = 0; i < 4; ++i) CHECK(g.data()[i] == doctest::Approx(2.0 * x.data()[i]).epsilon(1e-12));
}

TEST_CASE("backward twice throws") {
    Tape<double> tp;
    Value<double> vx = tp.leaf(Tensor<double>::ones({2}));
    Value<double> loss = sum_all(tp, vx);
    tp.backward(loss);
    CHECK_THROWS_AS(tp.backward(loss), Error);
}

TEST_CASE("backward requires a tracked scalar") {
    Tape<double> tp;
    CHECK_THROWS_AS(tp.backward(Value<double>(Tensor<double>::scalar(1.0))), Error);
    Value<double> vx = tp.leaf(Tensor<double>::ones({3}));
    CHECK_THROWS_AS(tp.backward(vx), ShapeError);  // non-scalar loss
}

TEST_CASE("inference tape allocates no gradient state") {
    Tape<float> tp(false);
    Value<float> vx = tp.leaf(Tensor<float>::ones({4}));
    Value<float> y = mul(tp, vx, vx);
    CHECK(!vx.tracked());
    CHECK(!y.tracked());
    CHECK(tp.node_count() == 0);
}

TEST_CASE("untouched parameters receive zero gradients") {
    Tape<double> tp;
    Tensor<double> used = Tensor<double>::ones({2});
    Tensor<double> unused = Tensor<double>::ones({3});
    Value<double> vu = tp.param(used);
    (void)tp.param(unused);
    tp.backward(sum_all(tp, vu));
    Tensor<double> g = tp.grad_of(unused);
    CHECK(g.shape() == Shape{3});
    for (double v : g.data()) CHECK(v == 0.0);
    // never-registered parameters also come back as zeros
    Tensor<double> never = Tensor<double>::ones({5});
    CHECK(tp.grad_of(never).numel() == 5);
}

TEST_CASE("param registration is memoized by storage") {
    Tape<double> tp;
    Tensor<double> w = Tensor<double>::ones({2});
    Value<double> a = tp.param(w);
    Value<double> b = tp.param(w);
    CHECK(a.node == b.node);
}

TEST_CASE("gradcheck: elementwise and reduction primitives") {
    check_shapes([](Tape<double>& tp, const Value<double>& x) { return silu(tp, x); },
                 {Shape{3}, Shape{2, 5}, Shape{2, 3, 4}});
    check_shapes([](Tape<double>& tp, const Value<double>& x) { return gelu(tp, x); },
                 {Shape{4}, Shape{3, 3}, Shape{2, 2, 2}});
    check_shapes([](Tape<double>& tp, const Value<double>& x) { return softmax_lastdim(tp, x); },
                 {Shape{5}, Shape{3, 4}, Shape{2, 3, 6}});
    check_shapes(
        [](Tape<double>& tp, const Value<double>& x) {
            Value<double> m = mean_all(tp, x);
            return m;
        },
        {Shape{3}, Shape{4, 4}, Shape{2, 2, 3}});
}

TEST_CASE("gradcheck: layer_norm wrt input, gamma and beta") {
    Rng rng(31);
    const Tensor<double> gamma = random_uniform<double>({6}, rng, 0.5, 1.5);
    const Tensor<double> beta = random_uniform<double>({6}, rng, -0.5, 0.5);
    check_shapes(
        [&](Tape<double>& tp, const Value<double>& x) {
            return layer_norm(tp, x, Value<double>(gamma), Value<double>(beta), 1e-5);
        },
        {Shape{6}, Shape{4, 6}, Shape{2, 3, 6}});

    // wrt gamma/beta with fixed input
    Tensor<double> x = random_uniform<double>({5, 6}, rng, -2.0, 2.0);
    auto wrt_gamma = [&](Tape<double>& tp, const Value<double>& g) {
        Value<double> y = layer_norm(tp, Value<double>(x), g, Value<double>(beta), 1e-5);
        Rng wr(77);
        Tensor<double> w = random_uniform<double>(y.data.shape(), wr, -1.0, 1.0);
        return sum_all(tp, mul_mask(tp, y, w));
    };
    CHECK(grad_check(wrt_gamma, gamma, kH, kTol).pass);
    auto wrt_beta = [&](Tape<double>& tp, const Value<double>& b) {
        Value<double> y = layer_norm(tp, Value<double>(x), Value<double>(gamma), b, 1e-5);
        Rng wr(78);
        Tensor<double> w = random_uniform<double>(y.data.shape(), wr, -1.0, 1.0);
        return sum_all(tp, mul_mask(tp, y, w));
    };
    CHECK(grad_check(wrt_beta, beta, kH, kTol).pass);
}

TEST_CASE("gradcheck: matmul wrt both operands") {
    Rng rng(41);
    const Tensor<double> rhs = random_uniform<double>({4, 3}, rng, -1.0, 1.0);
    check_shapes(
        [&](Tape<double>& tp, const Value<double>& a) {
            Value<double> a2 = reshape(tp, a, {a.data.numel() / 4, 4});
            return matmul(tp, a2, Value<double>(rhs));
        },
        {Shape{2, 4}, Shape{5, 4}, Shape{3, 4}});

    const Tensor<double> lhs = random_uniform<double>({2, 5, 4}, rng, -1.0, 1.0);
    auto wrt_b = [&](Tape<double>& tp, const Value<double>& b) {
        Value<double> b3 = reshape(tp, b, {2, 4, 3});
        Value<double> c = matmul(tp, Value<double>(lhs), b3);
        Rng wr(79);
        Tensor<double> w = random_uniform<double>(c.data.shape(), wr, -1.0, 1.0);
        return sum_all(tp, mul_mask(tp, c, w));
    };
    Tensor<double> b = random_uniform<double>({2, 4, 3}, rng, -1.0, 1.0);
    CHECK(grad_check(wrt_b, b, kH, kTol).pass);
}

TEST_CASE("gradcheck: permute, reshape, broadcast add, row scaling") {
    check_shapes(
        [](Tape<double>& tp, const Value<double>& x) {
            Value<double> p = permute(tp, x, {1, 0, 2});
            return reshape(tp, p, {x.data.numel()});
        },
        {Shape{2, 3, 4}, Shape{3, 2, 2}, Shape{1, 5, 3}});
    Rng rng(51);
    const Tensor<double> bias = random_uniform<double>({4}, rng, -1.0, 1.0);
    check_shapes(
        [&](Tape<double>& tp, const Value<double>& x) { return add_broadcast(tp, x, Value<double>(bias)); },
        {Shape{2, 4}, Shape{3, 2, 4}, Shape{4}});
    const Tensor<double> factors({3}, {0.5, 2.0, -1.0});
    check_shapes([&](Tape<double>& tp, const Value<double>& x) { return scale_rows(tp, x, factors); },
                 {Shape{3, 2}, Shape{3, 4}, Shape{3, 2, 2}});
    // gradient of the broadcast operand itself
    auto wrt_bias = [&](Tape<double>& tp, const Value<double>& b) {
        Rng r2(52);
        Tensor<double> x = random_uniform<double>({3, 4}, r2, -1.0, 1.0);
        Value<double> y = add_broadcast(tp, Value<double>(x), b);
        Rng wr(80);
        Tensor<double> w = random_uniform<double>(y.data.shape(), wr, -1.0, 1.0);
        return sum_all(tp, mul_mask(tp, y, w));
    };
    CHECK(grad_check(wrt_bias, bias, kH, kTol).pass);
}

TEST_CASE("gradcheck: mse loss against constant target") {
    Rng rng(61);
    const Tensor<double> target = random_uniform<double>({3, 4}, rng);
    auto f = [&](Tape<double>& tp, const Value<double>& x) { return mse_loss(tp, x, Value<double>(target)); };
    Tensor<double> x = random_uniform<double>({3, 4}, rng);
    CHECK(grad_check(f, x, kH, kTol).pass);
}

TEST_CASE("negative control: a wrong backward rule fails the check") {
    // silu forward paired with a deliberately scaled backward
    auto bad_op = [](Tape<double>& tp, const Value<double>& x) {
        Tensor<double> out = silu(x.data);
        const int32_t xn = x.node;
        Tensor<double> xsave = x.data;
        if (!tp.recording() || !x.tracked()) return Value<double>(std::move(out));
        const int32_t node = tp.record(out.shape(), [xn, xsave](Tape<double>& t, const Tensor<double>& g) {
            t.accumulate(xn, mul_scalar(mul(g, silu_grad(xsave)), 1.05));
        });
        return Value<double>(std::move(out), node);
    };
    auto f = [&](Tape<double>& tp, const Value<double>& x) { return sum_all(tp, bad_op(tp, x)); };
    Rng rng(71);
    Tensor<double> x = random_uniform<double>({6}, rng, 0.5, 1.5);
    CHECK(!grad_check(f, x, kH, kTol).pass);
}

TEST_CASE("non-deterministic function is rejected") {
    int calls = 0;
    auto f = [&calls](Tape<double>& tp, const Value<double>& x) {
        Value<double> y = sum_all(tp, x);
        return mul_scalar(tp, y, 1.0 + 0.001 * static_cast<double>(calls++));
    };
    Tensor<double> x = Tensor<double>::ones({3});
    CHECK_THROWS_AS((void)grad_check(f, x, kH, kTol), NumericError);
}

TEST_CASE("grad_check passes for simple oracles") {
    // sum of squares
    auto sq = [](Tape<double>& tp, const Value<double>& x) { return sum_all(tp, mul(tp, x, x)); };
    Rng rng(81);
    Tensor<double> x = random_uniform<double>({8}, rng, -2.0, 2.0);
    CHECK(grad_check(sq, x, 1e-5, 1e-6).pass);
    // linear layer
    const Tensor<double> w = random_uniform<double>({8, 3}, rng, -1.0, 1.0);
    auto lin = [&](Tape<double>& tp, const Value<double>& v) {
        Value<double> v2 = reshape(tp, v, {1, 8});
        return sum_all(tp, matmul(tp, v2, Value<double>(w)));
    };
    CHECK(grad_check(lin, x, 1e-5, 1e-6).pass);
    // far below the noise floor the same check must fail
    CHECK(!grad_check(sq, x, 1e-5, 1e-16).pass);
}

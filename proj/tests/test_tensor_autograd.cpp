#include <gtest/gtest.h>

#include "support.hpp"

using namespace padnet;
using namespace padnet::testing;

namespace {

Tensor4 identity_kernel(std::size_t channels) {
    Tensor4 w(Shape{channels, channels, 1, 1});
    for (std::size_t c = 0; c < channels; ++c) w.at(c, c, 0, 0) = 1.0;
    return w;
}

}  // namespace

TEST(Tensor, DataLengthMustMatchShape) {
    EXPECT_THROW(Tensor4(Shape{1, 2, 2, 2}, std::vector<double>(7)), ConfigError);
    const Tensor4 t(Shape{2, 3, 4, 5});
    EXPECT_EQ(t.size(), 120u);
}

TEST(Tensor, RowMajorNchwIndexing) {
    Tensor4 t(Shape{2, 3, 4, 5});
    EXPECT_EQ(t.index(1, 2, 3, 4), 119u);
    EXPECT_EQ(t.index(0, 1, 0, 0), 20u);
}

TEST(Conv2d, IdentityKernelReturnsInput) {
    std::mt19937_64 rng(1);
    const Tensor4 x = random_tensor(Shape{2, 3, 5, 6}, rng);
    const Tensor4 y = value_of([&](Tape& t) { return conv2d(t.constant(x), t.constant(identity_kernel(3)), {}, {}); });
    EXPECT_EQ(y, x);
}

TEST(Conv2d, AllOnesSummation) {
    const Tensor4 y = value_of([&](Tape& t) {
        return conv2d(t.constant(Tensor4(Shape{1, 1, 3, 3}, 1.0)), t.constant(Tensor4(Shape{1, 1, 3, 3}, 1.0)), {},
                      {});
    });
    ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
    EXPECT_DOUBLE_EQ(y.item(), 9.0);
}

TEST(Conv2d, DilatedMatchesNaiveLoops) {
    std::mt19937_64 rng(2);
    const Tensor4 x = random_tensor(Shape{2, 3, 8, 8}, rng);
    const Tensor4 w = random_tensor(Shape{4, 3, 3, 3}, rng);
    const Tensor4 b = random_tensor(Shape{1, 4, 1, 1}, rng);
    const ConvSpec spec{1, 2, 2};
    const Tensor4 y =
        value_of([&](Tape& t) { return conv2d(t.constant(x), t.constant(w), t.constant(b), spec); });
    const Tensor4 expected = naive_conv2d(x, w, &b, spec);
    ASSERT_EQ(y.shape(), expected.shape());
    EXPECT_LT(max_abs_diff(y, expected), 1e-12);
}

TEST(Conv2d, RandomGeometriesMatchNaiveLoops) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> small(1, 3), size(5, 11), k(1, 4);
    for (int trial = 0; trial < 40; ++trial) {
        const ConvSpec spec{small(rng), small(rng) - 1, small(rng)};
        const std::size_t kk = k(rng);
        const Shape xs{small(rng), small(rng), size(rng), size(rng)};
        if (std::min(xs.h, xs.w) + 2 * spec.padding < spec.dilation * (kk - 1) + 1) continue;
        const Tensor4 x = random_tensor(xs, rng);
        const Tensor4 w = random_tensor(Shape{small(rng), xs.c, kk, kk}, rng);
        const Tensor4 y = value_of([&](Tape& t) { return conv2d(t.constant(x), t.constant(w), {}, spec); });
        EXPECT_LT(max_abs_diff(y, naive_conv2d(x, w, nullptr, spec)), 1e-12) << "trial " << trial;
    }
}

TEST(Conv2d, ChannelMismatchIsConfigError) {
    Tape t;
    const Var x = t.constant(Tensor4(Shape{1, 3, 4, 4}));
    const Var w = t.constant(Tensor4(Shape{2, 2, 3, 3}));
    try {
        (void)conv2d(x, w, {}, {});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
    }
}

TEST(ConvOutputSize, FormulaAndDilationPreservesShape) {
    EXPECT_EQ(conv_output_size(8, 3, ConvSpec{1, 2, 2}), 8u);
    EXPECT_EQ(conv_output_size(64, 3, ConvSpec{2, 1, 1}), 32u);
    EXPECT_THROW((void)conv_output_size(2, 5, ConvSpec{}), ConfigError);
}

TEST(ConvTranspose2d, StrideTwoDoublesShape) {
    const Tensor4 y = value_of([&](Tape& t) {
        return conv_transpose2d(t.constant(Tensor4(Shape{1, 1, 4, 4}, 1.0)),
                                t.constant(Tensor4(Shape{1, 1, 2, 2}, 1.0)), {}, ConvSpec{2, 0, 1});
    });
    EXPECT_EQ(y.shape(), (Shape{1, 1, 8, 8}));
}

TEST(ConvTranspose2d, IdentityKernelReturnsInput) {
    std::mt19937_64 rng(4);
    const Tensor4 x = random_tensor(Shape{1, 2, 3, 3}, rng);
    const Tensor4 y =
        value_of([&](Tape& t) { return conv_transpose2d(t.constant(x), t.constant(identity_kernel(2)), {}, {}); });
    EXPECT_EQ(y, x);
}

TEST(ConvTranspose2d, AdjointIdentityOnHundredRandomPairs) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> small(1, 3), size(4, 12), k(1, 4);
    int checked = 0;
    while (checked < 100) {
        const ConvSpec spec{small(rng), small(rng) - 1, small(rng)};
        const std::size_t kk = k(rng);
        const Shape xs{small(rng), small(rng), size(rng), size(rng)};
        if (xs.h + 2 * spec.padding < spec.dilation * (kk - 1) + 1) continue;
        if (xs.w + 2 * spec.padding < spec.dilation * (kk - 1) + 1) continue;
        const std::size_t out_c = small(rng);
        const Tensor4 x = random_tensor(xs, rng);
        const Tensor4 w = random_tensor(Shape{out_c, xs.c, kk, kk}, rng);
        const Tensor4 cx = value_of([&](Tape& t) { return conv2d(t.constant(x), t.constant(w), {}, spec); });
        const Tensor4 y = random_tensor(cx.shape(), rng);
        // Output padding so the transpose lands back on x's extent.
        const std::size_t back_h = conv_transpose_output_size(cx.shape().h, kk, spec);
        const std::size_t back_w = conv_transpose_output_size(cx.shape().w, kk, spec);
        if (xs.h - back_h != xs.w - back_w) continue;
        const std::size_t op = xs.h - back_h;
        if (op >= std::max(spec.stride, spec.dilation)) continue;
        const Tensor4 ty =
            value_of([&](Tape& t) { return conv_transpose2d(t.constant(y), t.constant(w), {}, spec, op); });
        ASSERT_EQ(ty.shape(), xs);
        EXPECT_LT(std::abs(dot(cx, y) - dot(x, ty)), 1e-9) << "pair " << checked;
        ++checked;
    }
}

TEST(BilinearResize, SameSizeIsExactIdentity) {
    std::mt19937_64 rng(6);
    const Tensor4 x = random_tensor(Shape{2, 3, 5, 7}, rng);
    EXPECT_EQ(value_of([&](Tape& t) { return bilinear_resize(t.constant(x), 5, 7); }), x);
}

TEST(BilinearResize, ConstantStaysConstant) {
    const Tensor4 x(Shape{1, 2, 3, 4}, 2.5);
    const Tensor4 y = value_of([&](Tape& t) { return bilinear_resize(t.constant(x), 7, 2); });
    for (double v : y.data()) EXPECT_NEAR(v, 2.5, 1e-15);
}

TEST(BilinearResize, HandEvaluatedTwoByTwoToThreeByThree) {
    const Tensor4 x(Shape{1, 1, 2, 2}, std::vector<double>{0, 1, 2, 3});
    const Tensor4 y = value_of([&](Tape& t) { return bilinear_resize(t.constant(x), 3, 3); });
    const std::vector<double> expected{0, 0.5, 1, 1, 1.5, 2, 2, 2.5, 3};
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(y[i], expected[i], 1e-15) << i;
}

TEST(BilinearResize, MatchesWeightFormulaOracle) {
    std::mt19937_64 rng(7);
    const Tensor4 x = random_tensor(Shape{1, 2, 4, 5}, rng);
    const std::size_t oh = 7, ow = 3;
    const Tensor4 y = value_of([&](Tape& t) { return bilinear_resize(t.constant(x), oh, ow); });
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < oh; ++i)
            for (std::size_t j = 0; j < ow; ++j) {
                const double sy = i * 3.0 / (oh - 1), sx = j * 4.0 / (ow - 1);
                double acc = 0.0;
                for (std::size_t yy = 0; yy < 4; ++yy)
                    for (std::size_t xx = 0; xx < 5; ++xx) {
                        const double wy = std::max(0.0, 1.0 - std::abs(sy - yy));
                        const double wx = std::max(0.0, 1.0 - std::abs(sx - xx));
                        acc += wy * wx * x.at(0, c, yy, xx);
                    }
                EXPECT_NEAR(y.at(0, c, i, j), acc, 1e-12);
            }
}

TEST(Sigmoid, KnownValuesAndSaturation) {
    Tape t;
    const Var x = t.variable(Tensor4(Shape{1, 1, 1, 3}, std::vector<double>{0.0, 40.0, -40.0}));
    const Var y = sigmoid(x);
    EXPECT_DOUBLE_EQ(y.value()[0], 0.5);
    EXPECT_LT(1.0 - y.value()[1], 1e-15);
    EXPECT_GT(y.value()[2], 0.0);
    for (double v : y.value().data()) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(stable_sigmoid(-800.0), 0.0);
}

TEST(Sigmoid, GradientAtZeroIsQuarter) {
    Tape t;
    const Var x = t.variable(Tensor4::scalar(0.0));
    const Gradients g = t.backward(sigmoid(x));
    EXPECT_DOUBLE_EQ(g[x].item(), 0.25);
}

TEST(ConcatChannels, ShapesOrderAndUnaryCase) {
    std::mt19937_64 rng(8);
    const Tensor4 a = random_tensor(Shape{1, 2, 4, 4}, rng), b = random_tensor(Shape{1, 2, 4, 4}, rng);
    Tape t;
    const Var va = t.variable(a), vb = t.variable(b);
    const Var ab[] = {va, vb};
    const Var c = concat_channels(ab);
    EXPECT_EQ(c.shape(), (Shape{1, 4, 4, 4}));
    EXPECT_EQ(c.value().at(0, 3, 2, 1), b.at(0, 1, 2, 1));
    const Var only[] = {va};
    EXPECT_EQ(concat_channels(only).value(), a);

    const Gradients g = t.backward(sum(c));
    EXPECT_EQ(g[va], Tensor4(a.shape(), 1.0));
    EXPECT_EQ(g[vb], Tensor4(b.shape(), 1.0));
}

TEST(ConcatChannels, SpatialMismatchIsConfigError) {
    Tape t;
    const Var parts[] = {t.constant(Tensor4(Shape{1, 1, 4, 4})), t.constant(Tensor4(Shape{1, 1, 4, 5}))};
    EXPECT_THROW((void)concat_channels(parts), ConfigError);
}

TEST(Backward, PolynomialAndSigmoid) {
    Tape t;
    const Var x = t.variable(Tensor4::scalar(3.0));
    EXPECT_DOUBLE_EQ(t.backward(mul(x, x))[x].item(), 6.0);
}

TEST(Backward, NonScalarLossIsUsageError) {
    Tape t;
    const Var x = t.variable(Tensor4(Shape{1, 1, 2, 2}));
    EXPECT_THROW((void)t.backward(x), UsageError);
}

TEST(Backward, UnreachedParametersGetExactZero) {
    Tape t;
    const Var used = t.variable(Tensor4(Shape{1, 1, 2, 2}, 1.5));
    const Var unused = t.variable(Tensor4(Shape{1, 2, 1, 1}, 3.0));
    const Gradients g = t.backward(sum(scale(used, 2.0)));
    EXPECT_EQ(g[used], Tensor4(used.shape(), 2.0));
    EXPECT_EQ(g[unused], Tensor4::zeros(unused.shape()));
}

TEST(Backward, ReusedNodeAccumulates) {
    Tape t;
    const Var x = t.variable(Tensor4::scalar(2.0));
    const Var y = add(mul(x, x), scale(x, 3.0));  // x^2 + 3x
    EXPECT_DOUBLE_EQ(t.backward(y)[x].item(), 7.0);
}

TEST(Backward, TopologicalOrder) {
    Tape t;
    const Var a = t.variable(Tensor4::scalar(1.0));
    const Var b = sigmoid(a);
    const Var c = add(a, b);
    for (NodeId id = 0; id < t.size(); ++id)
        for (NodeId in : t.inputs(id)) EXPECT_LT(in, id);
    (void)c;
}

TEST(Determinism, ForwardIsBitIdentical) {
    std::mt19937_64 rng(9);
    const Tensor4 x = random_tensor(Shape{2, 3, 8, 8}, rng), w = random_tensor(Shape{4, 3, 3, 3}, rng);
    auto run = [&] {
        return value_of([&](Tape& t) {
            return elu(bilinear_resize(conv2d(t.constant(x), t.constant(w), {}, ConvSpec{2, 1, 1}), 9, 5));
        });
    };
    EXPECT_EQ(run(), run());
}

// Finite-difference agreement for every differentiable operation.
class OpGradient : public ::testing::Test {
protected:
    std::mt19937_64 rng{10};
    Tensor4 rand(Shape s) { return random_tensor(s, rng); }
};

TEST_F(OpGradient, Conv2dAllInputs) {
    const double err = finite_difference_error(
        [](Tape&, const std::vector<Var>& v) { return project(conv2d(v[0], v[1], v[2], ConvSpec{2, 2, 2})); },
        {rand(Shape{2, 2, 7, 6}), rand(Shape{3, 2, 3, 3}), rand(Shape{1, 3, 1, 1})});
    EXPECT_LT(err, 1e-4);
}

TEST_F(OpGradient, ConvTranspose2dAllInputs) {
    const double err = finite_difference_error(
        [](Tape&, const std::vector<Var>& v) {
            return project(conv_transpose2d(v[0], v[1], v[2], ConvSpec{2, 1, 1}));
        },
        {rand(Shape{2, 3, 4, 5}), rand(Shape{3, 2, 4, 4}), rand(Shape{1, 2, 1, 1})});
    EXPECT_LT(err, 1e-4);
}

TEST_F(OpGradient, BilinearUpAndDown) {
    for (auto [oh, ow] : {std::pair{9, 4}, std::pair{2, 3}, std::pair{1, 1}}) {
        const double err = finite_difference_error(
            [oh, ow](Tape&, const std::vector<Var>& v) {
                return project(bilinear_resize(v[0], static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)));
            },
            {rand(Shape{1, 2, 5, 6})});
        EXPECT_LT(err, 1e-4) << oh << "x" << ow;
    }
}

TEST_F(OpGradient, Pointwise) {
    const std::vector<std::pair<const char*, std::function<Var(Var)>>> ops{
        {"sigmoid", [](Var x) { return sigmoid(x); }},
        {"elu", [](Var x) { return elu(x); }},
        {"scale", [](Var x) { return scale(x, -1.7); }},
    };
    for (const auto& [name, op] : ops) {
        const double err = finite_difference_error(
            [&op](Tape&, const std::vector<Var>& v) { return project(op(v[0])); }, {rand(Shape{2, 2, 3, 3})});
        EXPECT_LT(err, 1e-4) << name;
    }
}

TEST_F(OpGradient, ReluAwayFromKink) {
    Tensor4 x = rand(Shape{1, 2, 4, 4});
    for (double& v : x.data()) v += v >= 0 ? 0.1 : -0.1;
    const double err = finite_difference_error(
        [](Tape&, const std::vector<Var>& v) { return project(relu(v[0])); }, {x});
    EXPECT_LT(err, 1e-4);
}

TEST_F(OpGradient, BinaryAndReductions) {
    const double err = finite_difference_error(
        [](Tape&, const std::vector<Var>& v) {
            const Var parts[] = {v[0], mul(v[0], v[1])};
            const Var terms[] = {sum(mul(v[0], v[1])), sum(add(v[0], v[1])), project(concat_channels(parts))};
            const double weights[] = {0.5, -2.0, 1.5};
            return weighted_sum(terms, weights);
        },
        {rand(Shape{2, 2, 3, 3}), rand(Shape{2, 2, 3, 3})});
    EXPECT_LT(err, 1e-4);
}

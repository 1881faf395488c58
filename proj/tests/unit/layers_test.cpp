#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fakespot/nn/layers.hpp"
#include "fakespot/nn/topology.hpp"
#include "oracles.hpp"

namespace fakespot::nn {
namespace {

using testing::naive_conv;
using testing::naive_dense;
using testing::naive_maxpool;
using testing::random_tensor;
using D = BasicTensor4<double>;

TEST(Conv2d, ZeroInputGivesZeroOutput)
{
    SeededRng rng(1);
    const auto k = random_tensor(rng, {2, 3, 3, 3}).cast<float>();
    const auto out = conv2d_forward(Tensor4::zeros({1, 3, 6, 6}), k, Tensor4::zeros({2, 1, 1, 1}));
    for (float v : out.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Conv2d, HandEvaluatedExample)
{
    const auto x = Tensor4::from_values({1, 1, 2, 2}, {1, 2, 3, 4});
    const auto k = Tensor4::from_values({1, 1, 2, 2}, {1, 0, 0, 1});
    const auto out = conv2d_forward(x, k, Tensor4::zeros({1, 1, 1, 1}));
    ASSERT_EQ(out.shape(), (Shape4{1, 1, 1, 1}));
    EXPECT_EQ(out[0], 5.0f);
}

TEST(Conv2d, ThirtyTwoByThreeGivesThirty)
{
    const auto out = conv2d_forward(Tensor4::zeros({1, 3, 32, 32}), Tensor4::zeros({4, 3, 3, 3}), Tensor4::zeros({4, 1, 1, 1}));
    EXPECT_EQ(out.shape(), (Shape4{1, 4, 30, 30}));
}

TEST(Conv2d, RejectsChannelMismatchAndOversizedKernel)
{
    EXPECT_THROW(conv2d_forward(Tensor4::zeros({1, 3, 5, 5}), Tensor4::zeros({1, 2, 3, 3}), Tensor4::zeros({1, 1, 1, 1})),
                 std::invalid_argument);
    EXPECT_THROW(conv2d_forward(Tensor4::zeros({1, 1, 2, 2}), Tensor4::zeros({1, 1, 3, 3}), Tensor4::zeros({1, 1, 1, 1})),
                 std::invalid_argument);
}

TEST(Conv2d, MatchesDirectSummationOnRandomInstances)
{
    SeededRng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const Shape4 xs{1 + rng.below(3), 1 + rng.below(4), 3 + rng.below(8), 3 + rng.below(8)};
        const Shape4 ks{1 + rng.below(4), xs.c, 1 + rng.below(3), 1 + rng.below(3)};
        const auto x = random_tensor(rng, xs);
        const auto k = random_tensor(rng, ks);
        const auto b = random_tensor(rng, {ks.n, 1, 1, 1});
        const auto got = conv2d_forward(x, k, b);
        const auto want = naive_conv(x, k, b);
        ASSERT_EQ(got.shape(), want.shape());
        for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-12);
    }
}

TEST(OutputShape, Examples)
{
    EXPECT_EQ(output_shape(32, 32, 3, 3), (std::pair<std::size_t, std::size_t>{30, 30}));
    EXPECT_EQ(output_shape(7, 9, 1, 1), (std::pair<std::size_t, std::size_t>{7, 9}));
    EXPECT_EQ(output_shape(5, 5, 5, 5), (std::pair<std::size_t, std::size_t>{1, 1}));
    EXPECT_THROW(output_shape(2, 5, 3, 3), std::invalid_argument);
}

TEST(OutputShape, ShapeLawProperty)
{
    SeededRng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t h = 1 + rng.below(12), w = 1 + rng.below(12);
        const std::size_t m = 1 + rng.below(h), n = 1 + rng.below(w);
        const auto out = conv2d_forward(Tensor4::zeros({1, 1, h, w}), Tensor4::zeros({1, 1, m, n}), Tensor4::zeros({1, 1, 1, 1}));
        ASSERT_EQ(out.shape().h, h - m + 1);
        ASSERT_EQ(out.shape().w, w - n + 1);
        ASSERT_EQ(output_shape(h, w, m, n), (std::pair{h - m + 1, w - n + 1}));
    }
}

TEST(Relu, ForwardAndBackwardExamples)
{
    const auto x = Tensor4::from_values({1, 1, 1, 4}, {-1, 3, 2, -2});
    EXPECT_EQ(relu(x).values(), (std::vector<float>{0, 3, 2, 0}));
    const auto up = Tensor4::constant({1, 1, 1, 4}, 5);
    EXPECT_EQ(relu_backward(x, up).values(), (std::vector<float>{0, 5, 5, 0}));
    const auto zero = Tensor4::zeros({1, 1, 1, 1});
    EXPECT_EQ(relu_backward(zero, Tensor4::constant({1, 1, 1, 1}, 5))[0], 0.0f);
}

TEST(MaxPool, WindowMaxAndIndex)
{
    const auto r = maxpool2(Tensor4::from_values({1, 1, 2, 2}, {1, 2, 3, 4}));
    EXPECT_EQ(r.output.values(), (std::vector<float>{4}));
    ASSERT_EQ(r.argmax.size(), 1u);
    EXPECT_EQ(r.argmax[0], 3u);  // (1, 1)
}

TEST(MaxPool, ConstantInputTiesGoToTheFirstIndex)
{
    const auto r = maxpool2(Tensor4::constant({1, 1, 4, 4}, 2.5f));
    for (float v : r.output.data()) EXPECT_EQ(v, 2.5f);
    EXPECT_EQ(r.argmax, (std::vector<std::size_t>{0, 2, 8, 10}));
}

TEST(MaxPool, BackwardRoutesToTheStoredIndex)
{
    const auto r = maxpool2(Tensor4::from_values({1, 1, 2, 2}, {1, 2, 3, 4}));
    const auto g = maxpool2_backward(r.argmax, r.input_shape, Tensor4::constant({1, 1, 1, 1}, 7));
    EXPECT_EQ(g.values(), (std::vector<float>{0, 0, 0, 7}));
}

TEST(MaxPool, OddExtentsDropTheTrailingRowAndColumn)
{
    SeededRng rng(4);
    const auto x = random_tensor(rng, {2, 3, 15, 15});
    const auto r = maxpool2(x);
    EXPECT_EQ(r.output.shape(), (Shape4{2, 3, 7, 7}));
    const auto want = naive_maxpool(x);
    for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(r.output[i], want[i]);
}

TEST(Dense, IdentityWeightsPassTheInputThrough)
{
    const auto x = Tensor4::from_values({1, 3, 1, 1}, {1.5, -2, 4});
    auto w = Tensor4::zeros({3, 3, 1, 1});
    for (std::size_t i = 0; i < 3; ++i) w(i, i, 0, 0) = 1;
    EXPECT_EQ(dense_forward(x, w, Tensor4::zeros({3, 1, 1, 1})).values(), x.values());
}

TEST(Dense, HandEvaluatedForwardAndBackward)
{
    const auto x = Tensor4::from_values({1, 2, 1, 1}, {2, 3});
    const auto w = Tensor4::from_values({1, 2, 1, 1}, {1, 1});
    const auto b = Tensor4::from_values({1, 1, 1, 1}, {1});
    EXPECT_EQ(dense_forward(x, w, b).values(), (std::vector<float>{6}));
    const auto g = dense_backward(x, w, Tensor4::constant({1, 1, 1, 1}, 1));
    EXPECT_EQ(g.weight.values(), (std::vector<float>{2, 3}));
    EXPECT_EQ(g.bias.values(), (std::vector<float>{1}));
    EXPECT_EQ(g.input.values(), (std::vector<float>{1, 1}));
}

TEST(Dense, MatchesDirectProductAndRejectsMismatch)
{
    SeededRng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Shape4 xs{1 + rng.below(4), 1 + rng.below(5), 1 + rng.below(3), 1 + rng.below(3)};
        const std::size_t units = 1 + rng.below(20);
        const auto x = random_tensor(rng, xs);
        const auto w = random_tensor(rng, {units, xs.item_size(), 1, 1});
        const auto b = random_tensor(rng, {units, 1, 1, 1});
        const auto got = dense_forward(x, w, b);
        const auto want = naive_dense(x, w, b);
        for (std::size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-12);
    }
    EXPECT_THROW(dense_forward(Tensor4::zeros({1, 3, 1, 1}), Tensor4::zeros({2, 4, 1, 1}), Tensor4::zeros({2, 1, 1, 1})),
                 std::invalid_argument);
}

TEST(Sigmoid, Examples)
{
    EXPECT_EQ(sigmoid(0.0), 0.5);
    EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
    SeededRng rng(6);
    for (int i = 0; i < 1000; ++i) {
        const double z = rng.uniform(-30.0, 30.0);
        ASSERT_NEAR(sigmoid(z) + sigmoid(-z), 1.0, 1e-12);
    }
}

TEST(Sigmoid, StableForLargeMagnitudes)
{
    for (double z : {-500.0, -100.0, 100.0, 500.0}) {
        const double p = sigmoid(z);
        EXPECT_TRUE(std::isfinite(p));
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    EXPECT_TRUE(std::isfinite(sigmoid(-500.0f)));
}

TEST(PredictLabel, ThresholdExamples)
{
    EXPECT_EQ(predict_label(0.51), 1);
    EXPECT_EQ(predict_label(0.49), 0);
    EXPECT_EQ(predict_label(0.5), 1);
}

TEST(PredictLabel, ThresholdMatchesLogitSignExactly)
{
    SeededRng rng(7);
    std::vector<float> zs{0.0f, -0.0f, std::numeric_limits<float>::denorm_min(), -std::numeric_limits<float>::denorm_min(),
                          1e-30f, -1e-30f, 1e-8f, -1e-8f};
    for (int i = 0; i < 20000; ++i) zs.push_back(static_cast<float>(rng.uniform(-20.0, 20.0) * std::pow(10.0, -rng.uniform(0, 9))));
    for (float z : zs) ASSERT_EQ(predict_label(sigmoid(z)) == 1, z >= 0.0f) << z;
    for (double z : {0.0, -1e-300, 1e-300, -1e-17, 1e-17}) ASSERT_EQ(predict_label(sigmoid(z)) == 1, z >= 0.0) << z;
}

TEST(Bce, Examples)
{
    EXPECT_NEAR(bce_loss(1.0, 1), 1e-7, 1e-12);
    EXPECT_NEAR(bce_loss(0.5, 1), std::log(2.0), 1e-15);
    EXPECT_NEAR(bce_loss(0.5, 0), std::log(2.0), 1e-15);
    EXPECT_DOUBLE_EQ(bce_logit_grad(0.8, 1), 0.8 - 1.0);
    EXPECT_TRUE(std::isfinite(bce_loss(0.0, 1)));
}

}  // namespace
}  // namespace fakespot::nn

#include <gtest/gtest.h>

#include <cmath>

#include "fakespot/diffusion.hpp"

namespace fakespot::diffusion {
namespace {

TEST(Schedule, SingleStepUsesBetaStart)
{
    const auto s = linear_schedule(1);
    ASSERT_EQ(s.steps(), 1u);
    EXPECT_DOUBLE_EQ(s.alpha_bar[0], 1.0 - 1e-4);
}

TEST(Schedule, LinearBetasAndDecreasingRetention)
{
    const auto s = linear_schedule(50);
    ASSERT_EQ(s.steps(), 50u);
    EXPECT_DOUBLE_EQ(s.beta.front(), 1e-4);
    EXPECT_NEAR(s.beta.back(), 0.02, 1e-15);
    double prod = 1.0;
    for (std::size_t t = 0; t < 50; ++t) {
        EXPECT_NEAR(s.beta[t], 1e-4 + (0.02 - 1e-4) * static_cast<double>(t) / 49.0, 1e-15);
        prod *= 1.0 - s.beta[t];
        EXPECT_NEAR(s.alpha_bar[t], prod, 1e-15);
        if (t > 0) EXPECT_LT(s.alpha_bar[t], s.alpha_bar[t - 1]);
    }
}

TEST(Schedule, RejectsBadArguments)
{
    EXPECT_THROW(linear_schedule(0), std::invalid_argument);
    EXPECT_THROW(linear_schedule(10, 0.0, 0.02), std::invalid_argument);
    EXPECT_THROW(linear_schedule(10, 0.03, 0.02), std::invalid_argument);
    EXPECT_THROW(linear_schedule(10, 1e-4, 1.0), std::invalid_argument);
}

TEST(Mix, LimitsAndWorkedExample)
{
    const auto x0 = Tensor4::from_values({1, 1, 1, 3}, {0.3f, -0.7f, 1.0f});
    const auto eps = Tensor4::from_values({1, 1, 1, 3}, {2.0f, 0.5f, -1.0f});
    EXPECT_EQ(mix(x0, eps, 1.0), x0);
    EXPECT_EQ(mix(x0, eps, 0.0), eps);
    const auto one = Tensor4::from_values({1, 1, 1, 1}, {1.0f});
    const auto two = Tensor4::from_values({1, 1, 1, 1}, {2.0f});
    // sqrt(0.25) * 2 + sqrt(0.75) * 2
    EXPECT_NEAR(mix(two, two, 0.25)[0], 1.0 + std::sqrt(0.75) * 2.0, 1e-6);
    EXPECT_NEAR(mix(two, two, 0.25)[0], 2.7321, 1e-4);
    EXPECT_THROW(mix(x0, one, 0.5), std::invalid_argument);
    EXPECT_THROW(mix(x0, eps, 1.5), std::invalid_argument);
}

TEST(Noisify, VarianceMatchesTheSchedule)
{
    const auto s = linear_schedule(50);
    for (std::size_t step : {1u, 10u, 25u, 50u}) {
        const double ab = s.alpha_bar[step - 1];
        SeededRng rng(step);
        const auto x0 = Tensor4::constant({1, 1, 100, 1000}, 0.0f);
        const auto r = noisify(x0, step, s, rng);
        double sum = 0.0, sq = 0.0;
        for (float v : r.xt.data()) {
            sum += v;
            sq += static_cast<double>(v) * v;
        }
        const double n = static_cast<double>(r.xt.size());
        const double var = sq / n - (sum / n) * (sum / n);
        EXPECT_NEAR(var, 1.0 - ab, 0.03 * (1.0 - ab)) << step;
    }
}

TEST(Mix, PreservesUnitVariance)
{
    for (double ab : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
        SeededRng rng(static_cast<std::uint64_t>(ab * 100) + 1);
        const auto x0 = sample_normal(rng, {1, 1, 100, 1000}, 0.0, 1.0);
        const auto eps = sample_normal(rng, {1, 1, 100, 1000}, 0.0, 1.0);
        const auto xt = mix(x0, eps, ab);
        double sum = 0.0, sq = 0.0;
        for (float v : xt.data()) {
            sum += v;
            sq += static_cast<double>(v) * v;
        }
        const double n = static_cast<double>(xt.size());
        EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0, 0.03) << ab;
    }
}

TEST(Noisify, ReturnsTheNoiseItUsed)
{
    const auto s = linear_schedule(50);
    SeededRng rng(3);
    const auto x0 = sample_normal(rng, {1, 3, 8, 8}, 0.0, 1.0);
    SeededRng a(7), b(7);
    const auto r = noisify(x0, 17, s, a);
    EXPECT_EQ(r.xt, mix(x0, r.eps, s.alpha_bar[16]));
    EXPECT_EQ(noisify(x0, 17, s, b).xt, r.xt);
    EXPECT_THROW(noisify(x0, 0, s, a), std::invalid_argument);
    EXPECT_THROW(noisify(x0, 51, s, a), std::invalid_argument);
}

TEST(Loss, WorkedExamples)
{
    const auto z = Tensor4::zeros({1, 1, 2, 2});
    EXPECT_EQ(diffusion_loss(z, z), 0.0);
    const auto twos = Tensor4::constant({1, 1, 2, 2}, 2.0f);
    EXPECT_NEAR(diffusion_loss(twos, z), 4.0, 1e-9);
    const auto a = Tensor4::from_values({1, 1, 1, 2}, {1.0f, -2.0f});
    const auto b = Tensor4::from_values({1, 1, 1, 2}, {0.0f, 0.0f});
    EXPECT_NEAR(diffusion_loss(a, b), 2.5, 1e-9);
    EXPECT_THROW(diffusion_loss(a, z), std::invalid_argument);
}

}  // namespace
}  // namespace fakespot::diffusion

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fakespot/rng.hpp"
#include "fakespot/tensor.hpp"

namespace fakespot::diffusion {

/// Per-step variances beta_t and their cumulative retention
/// alpha_bar_t = prod_{s<=t} (1 - beta_s), both indexed from step 1 at [0].
struct NoiseSchedule {
    std::vector<double> beta;
    std::vector<double> alpha_bar;

    std::size_t steps() const noexcept { return alpha_bar.size(); }
};

/// beta linearly spaced from beta_start (step 1) to beta_end (step T).
/// Throws std::invalid_argument unless T >= 1 and 0 < beta_start <= beta_end < 1.
NoiseSchedule linear_schedule(std::size_t steps = 50, double beta_start = 1e-4, double beta_end = 0.02);

struct Noised {
    Tensor4 xt;
    Tensor4 eps;
};

/// Forward noising x_t = sqrt(alpha_bar_t) x_0 + sqrt(1 - alpha_bar_t) eps with
/// eps ~ N(0, 1) drawn from rng. `step` is 1-based; the drawn eps is returned.
Noised noisify(const Tensor4& x0, std::size_t step, const NoiseSchedule& schedule, SeededRng& rng);

/// Same mixture with a caller-supplied eps.
Tensor4 mix(const Tensor4& x0, const Tensor4& eps, double alpha_bar);

/// Mean over all elements of (eps_true - eps_pred)^2.
double diffusion_loss(const Tensor4& eps_true, const Tensor4& eps_pred);

}  // namespace fakespot::diffusion

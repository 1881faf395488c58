#include "fakespot/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace fakespot::diffusion {

NoiseSchedule linear_schedule(std::size_t steps, double beta_start, double beta_end)
{
    if (steps == 0) throw std::invalid_argument("linear_schedule: at least one step is required");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw std::invalid_argument("linear_schedule: need 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.beta.resize(steps);
    s.alpha_bar.resize(steps);
    double keep = 1.0;
    for (std::size_t t = 0; t < steps; ++t) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(steps - 1);
        s.beta[t] = beta_start + frac * (beta_end - beta_start);
        keep *= 1.0 - s.beta[t];
        s.alpha_bar[t] = keep;
    }
    return s;
}

Tensor4 mix(const Tensor4& x0, const Tensor4& eps, double alpha_bar)
{
    if (!(x0.shape() == eps.shape())) throw std::invalid_argument("noisify: x0 and eps shapes differ");
    if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) throw std::invalid_argument("noisify: alpha_bar outside [0, 1]");
    const double signal = std::sqrt(alpha_bar);
    const double noise = std::sqrt(1.0 - alpha_bar);
    Tensor4 out(x0.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>(signal * static_cast<double>(x0[i]) + noise * static_cast<double>(eps[i]));
    }
    return out;
}

Noised noisify(const Tensor4& x0, std::size_t step, const NoiseSchedule& schedule, SeededRng& rng)
{
    if (step < 1 || step > schedule.steps()) {
        throw std::invalid_argument("noisify: step " + std::to_string(step) + " outside [1, " +
                                    std::to_string(schedule.steps()) + "]");
    }
    Noised r;
    r.eps = sample_normal(rng, x0.shape(), 0.0, 1.0);
    r.xt = mix(x0, r.eps, schedule.alpha_bar[step - 1]);
    return r;
}

double diffusion_loss(const Tensor4& eps_true, const Tensor4& eps_pred)
{
    if (!(eps_true.shape() == eps_pred.shape())) throw std::invalid_argument("diffusion_loss: shape mismatch");
    if (eps_true.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < eps_true.size(); ++i) {
        const double d = static_cast<double>(eps_true[i]) - static_cast<double>(eps_pred[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(eps_true.size());
}

}  // namespace fakespot::diffusion

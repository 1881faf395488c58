#include "fakespot/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace fakespot::nn {

template <typename T>
AdamState<T> make_adam_state(const ModelTopology& topology, AdamConfig config)
{
    return AdamState<T>{config, 0, zero_parameters<T>(topology), zero_parameters<T>(topology)};
}

template <typename T>
void adam_step(Parameters<T>& params, const Parameters<T>& grads, AdamState<T>& state)
{
    if (!same_shapes(params, grads) || !same_shapes(params, state.first_moment) ||
        !same_shapes(params, state.second_moment)) {
        throw std::invalid_argument("adam_step: parameter, gradient and moment shapes differ");
    }
    const auto& cfg = state.config;
    const double t = static_cast<double>(state.step + 1);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);

    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = state.first_moment.tensors();
    auto v = state.second_moment.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto pd = p[k]->data();
        auto gd = g[k]->data();
        auto md = m[k]->data();
        auto vd = v[k]->data();
        for (std::size_t i = 0; i < pd.size(); ++i) {
            const double gi = gd[i];
            const double mi = cfg.beta1 * md[i] + (1.0 - cfg.beta1) * gi;
            const double vi = cfg.beta2 * vd[i] + (1.0 - cfg.beta2) * gi * gi;
            md[i] = static_cast<T>(mi);
            vd[i] = static_cast<T>(vi);
            pd[i] = static_cast<T>(pd[i] - cfg.learning_rate * (mi / c1) / (std::sqrt(vi / c2) + cfg.epsilon));
        }
    }
    ++state.step;
}

template AdamState<float> make_adam_state<float>(const ModelTopology&, AdamConfig);
template AdamState<double> make_adam_state<double>(const ModelTopology&, AdamConfig);
template void adam_step<float>(Parameters<float>&, const Parameters<float>&, AdamState<float>&);
template void adam_step<double>(Parameters<double>&, const Parameters<double>&, AdamState<double>&);

}  // namespace fakespot::nn

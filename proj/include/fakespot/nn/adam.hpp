#pragma once

#include <cstdint>

#include "fakespot/nn/parameters.hpp"

namespace fakespot::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    Parameters<T> first_moment;
    Parameters<T> second_moment;
};

template <typename T>
AdamState<T> make_adam_state(const ModelTopology& topology, AdamConfig config = {});

/// One bias-corrected Adam update:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
///   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
/// Throws std::invalid_argument if any tensor shape disagrees.
template <typename T>
void adam_step(Parameters<T>& params, const Parameters<T>& grads, AdamState<T>& state);

extern template AdamState<float> make_adam_state<float>(const ModelTopology&, AdamConfig);
extern template AdamState<double> make_adam_state<double>(const ModelTopology&, AdamConfig);
extern template void adam_step<float>(Parameters<float>&, const Parameters<float>&, AdamState<float>&);
extern template void adam_step<double>(Parameters<double>&, const Parameters<double>&, AdamState<double>&);

}  // namespace fakespot::nn

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fakespot/nn/adam.hpp"
#include "fakespot/nn/network.hpp"

namespace fakespot::nn {

struct TrainingProvenance {
    std::uint64_t seed = 1;
    std::uint32_t epochs = 0;
    std::uint32_t batch_size = 32;
    double learning_rate = 1e-3;
};

/// A topology with its float parameters and how they were produced.
struct TrainedModel {
    ModelTopology topology;
    Parameters<float> params;
    TrainingProvenance provenance;
    std::optional<AdamState<float>> optimizer;

    /// Freshly initialised, untrained model.
    static TrainedModel initialise(const ModelTopology& topology, std::uint64_t seed);

    ForwardResult<float> forward(const Tensor4& batch) const { return nn::forward(topology, params, batch); }
    std::vector<float> predict(const Tensor4& batch) const { return forward(batch).probabilities; }
};

}  // namespace fakespot::nn

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fakespot/data/dataset.hpp"
#include "fakespot/metrics.hpp"
#include "fakespot/nn/model.hpp"

namespace fakespot {

struct TrainConfig {
    std::uint64_t seed = 1;
    std::size_t batch_size = 32;
    std::size_t epochs = 10;
    nn::AdamConfig adam;
    bool keep_optimizer_state = true;
};

struct EpochSummary {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    metrics::MetricsReport validation;
    double seconds = 0.0;
};

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainingResult {
    nn::TrainedModel model;
    std::vector<EpochSummary> history;
};

/// Mini-batch Adam on mean BCE. Parameters are initialised from SeededRng(seed);
/// the per-epoch batch order comes from SeededRng(seed).split(1). After every
/// epoch the model is evaluated on split.test (skipped when the test set is
/// empty). Throws TrainingDiverged as soon as a batch loss or parameter becomes
/// non-finite.
TrainingResult train_model(const nn::ModelTopology& topology, const data::DatasetSplit& split, const TrainConfig& config,
                           const std::function<void(const EpochSummary&)>& on_epoch = {});

}  // namespace fakespot

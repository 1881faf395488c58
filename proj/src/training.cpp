#include "fakespot/training.hpp"

#include <chrono>
#include <cmath>

namespace fakespot {

TrainingResult train_model(const nn::ModelTopology& topology, const data::DatasetSplit& split, const TrainConfig& config,
                           const std::function<void(const EpochSummary&)>& on_epoch)
{
    if (split.train.empty()) throw std::invalid_argument("train_model: training set is empty");
    topology.validate();

    TrainingResult result;
    auto& model = result.model;
    model = nn::TrainedModel::initialise(topology, config.seed);
    model.provenance.batch_size = static_cast<std::uint32_t>(config.batch_size);
    model.provenance.learning_rate = config.adam.learning_rate;

    auto optimizer = nn::make_adam_state<float>(topology, config.adam);
    SeededRng order_rng = SeededRng(config.seed).split(1);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        for (const auto& idx : data::batch_indices(split.train.size(), config.batch_size, order_rng)) {
            const auto batch = data::gather_batch(split.train, idx);
            const auto fwd = model.forward(batch.images);
            const double loss = nn::mean_bce<float>(fwd.probabilities, batch.labels);
            if (!std::isfinite(loss)) {
                throw TrainingDiverged("non-finite loss in epoch " + std::to_string(epoch) + " at optimizer step " +
                                       std::to_string(optimizer.step + 1));
            }
            loss_sum += loss * static_cast<double>(idx.size());
            const auto grads = nn::backward<float>(topology, model.params, fwd, batch.labels);
            nn::adam_step(model.params, grads, optimizer);
        }
        for (const auto* t : model.params.tensors()) {
            if (!all_finite(*t)) throw TrainingDiverged("non-finite parameter after epoch " + std::to_string(epoch));
        }

        EpochSummary summary;
        summary.epoch = epoch;
        summary.train_loss = loss_sum / static_cast<double>(split.train.size());
        if (!split.test.empty()) summary.validation = metrics::evaluate(model, split.test, config.batch_size);
        if (!std::isfinite(summary.validation.mean_loss)) {
            throw TrainingDiverged("non-finite validation loss after epoch " + std::to_string(epoch));
        }
        summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        model.provenance.epochs = static_cast<std::uint32_t>(epoch);
        result.history.push_back(summary);
        if (on_epoch) on_epoch(summary);
    }
    if (config.keep_optimizer_state) model.optimizer = std::move(optimizer);
    return result;
}

}  // namespace fakespot

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "fakespot/cli/config.hpp"
#include "fakespot/data/dataset.hpp"
#include "fakespot/gradcam.hpp"
#include "fakespot/metrics.hpp"
#include "fakespot/search.hpp"
#include "fakespot/training.hpp"

namespace fakespot::cli {

/// Checks data_root/{train,test}, loads both trees and applies the per-class
/// caps with SeededRng(seed).split(2) for train and .split(3) for test.
data::DatasetSplit load_run_data(const RunConfig& config);

/// The capped test tree alone, sampled exactly as load_run_data samples it.
std::vector<data::LabeledImage> load_test_data(const RunConfig& config);

struct TrainOutcome {
    TrainingResult result;
    std::filesystem::path checkpoint;  // <output_dir>/model.fspt
    std::filesystem::path epoch_log;   // <output_dir>/epoch_log.csv
    std::filesystem::path timing_log;  // <output_dir>/epoch_timing.csv
};

/// Trains config.topology. Writes config.txt, then after every epoch rewrites
/// epoch_log.csv (epoch,train_loss,val_loss,val_accuracy,precision,recall,f1)
/// and epoch_timing.csv (epoch,seconds), and finally the checkpoint.
TrainOutcome cmd_train(const RunConfig& config, std::ostream* log = nullptr);

struct EvaluateOutcome {
    metrics::MetricsReport report;
    std::filesystem::path report_path;  // <output_dir>/evaluation.csv
};

/// Loads the checkpoint before touching anything else, so a corrupt file leaves
/// no output behind.
EvaluateOutcome cmd_evaluate(const std::filesystem::path& checkpoint, const RunConfig& config, std::ostream* log = nullptr);

struct GridOutcome {
    std::vector<search::RunRecord> stage1;
    std::vector<search::RunRecord> stage2;
    search::GridStage1Point winner;
    std::vector<std::filesystem::path> tables;
    std::filesystem::path summary;  // <output_dir>/summary.txt
};

/// Both search stages. Records go to <output_dir>/records.jsonl, checkpoints to
/// <output_dir>/checkpoints, tables to <output_dir>/tables. config.resume reuses
/// finished records.
GridOutcome cmd_gridsearch(const RunConfig& config, std::ostream* log = nullptr);

struct ExplainRequest {
    std::filesystem::path checkpoint;
    std::vector<std::filesystem::path> images;
    std::filesystem::path out_dir;
    gradcam::ExplainOptions options;
};

/// One outcome per image; the source id of an image is its file stem. An
/// invalid layer index or two inputs sharing a stem fail the whole request
/// before any file is written.
std::vector<gradcam::ExplainOutcome> cmd_explain(const ExplainRequest& request);

struct NoisifyRequest {
    std::filesystem::path input;
    std::filesystem::path output;
    std::size_t step = 1;   // 1-based
    std::size_t steps = 50;
    std::uint64_t seed = 1;
};

/// Pixels are mapped from [0, 1] to [-1, 1], noised to `step`, mapped back and
/// clamped for PNG output.
void cmd_noisify(const NoisifyRequest& request);

struct SynthRequest {
    std::filesystem::path out_root;
    std::size_t train_per_class = 3000;
    std::size_t test_per_class = 100;
    std::uint64_t seed = 1;
};

/// Writes the square corpus as <out_root>/{train,test}/{FAKE,REAL}/<index>.png
/// (squares are REAL) plus <out_root>/{train,test}/squares.csv with each square's
/// top-left corner.
void cmd_synth_corpus(const SynthRequest& request);

}  // namespace fakespot::cli

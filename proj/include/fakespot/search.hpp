#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fakespot/data/dataset.hpp"
#include "fakespot/metrics.hpp"
#include "fakespot/nn/topology.hpp"
#include "fakespot/training.hpp"

namespace fakespot::search {

inline constexpr std::size_t kStage1Filters[] = {16, 32, 64, 128};
inline constexpr std::size_t kStage2Units[] = {32, 64, 128, 256, 512, 1024, 2048, 4096};
inline constexpr std::size_t kGridLayers[] = {1, 2, 3};

/// Feature-extractor candidate: `conv_layers` conv(3x3)+pool stages of `filters`
/// filters each, flattened straight into the output unit.
struct GridStage1Point {
    std::size_t filters = 0;
    std::size_t conv_layers = 0;

    nn::ModelTopology topology() const;
    friend bool operator==(const GridStage1Point&, const GridStage1Point&) = default;
};

/// Dense-head candidate on a fixed feature extractor.
struct GridStage2Point {
    nn::ModelTopology extractor;  // conv stack; its dense layers are ignored
    std::size_t units = 0;
    std::size_t dense_layers = 0;

    nn::ModelTopology topology() const;
    friend bool operator==(const GridStage2Point&, const GridStage2Point&) = default;
};

/// Stage-independent grid coordinate. `row` is the filter count (stage 1) or the
/// dense width (stage 2); `layers` is the conv or dense depth respectively.
struct GridPoint {
    int stage = 1;
    std::size_t row = 0;
    std::size_t layers = 0;
    nn::ModelTopology topology;

    GridPoint() = default;
    GridPoint(const GridStage1Point& p);  // NOLINT(google-explicit-constructor)
    GridPoint(const GridStage2Point& p);  // NOLINT(google-explicit-constructor)

    /// Unique within a search: "s<stage>-<row>x<layers>".
    std::string key() const;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Filters-major: (16,1), (16,2), (16,3), (32,1), ...
std::vector<GridStage1Point> enumerate_stage1();

/// Units-major: (32,1), (32,2), (32,3), (64,1), ... Every point embeds `winner`'s
/// conv stack and is validated on construction.
std::vector<GridStage2Point> enumerate_stage2(const GridStage1Point& winner);
std::vector<GridStage2Point> enumerate_stage2(const nn::ModelTopology& extractor);

struct RunRecord {
    GridPoint point;
    std::string descriptor;
    std::uint64_t seed = 1;
    std::size_t epochs = 0;
    std::size_t parameter_count = 0;
    metrics::MetricsReport metrics;  // final-epoch evaluation on the test split
    double seconds = 0.0;            // wall clock, excluded from equality
    std::string checkpoint;          // empty when checkpoints are not kept
    bool failed = false;
    std::string error;

    /// Equality on everything except wall-clock seconds.
    bool same_result(const RunRecord& other) const;
};

std::string to_json_line(const RunRecord& record);
RunRecord from_json_line(const std::string& line);

struct GridOptions {
    /// JSONL log, rewritten atomically after every finished point. Empty disables it.
    std::filesystem::path records_path;
    /// Directory for per-point checkpoints (<key>.fspt). Empty disables them.
    std::filesystem::path checkpoint_dir;
    /// Reuse records already present in records_path instead of retraining them.
    bool resume = false;
};

struct GridProgress {
    std::size_t index = 0;  // 0-based position in `points`
    std::size_t total = 0;
    const RunRecord* record = nullptr;
    bool reused = false;
};

/// Trains every point from a fresh initialisation with `config.seed` and
/// evaluates it on split.test. A diverging run becomes a failed record. Records
/// are returned in point order.
std::vector<RunRecord> run_grid(std::span<const GridPoint> points, const data::DatasetSplit& split, const TrainConfig& config,
                                const GridOptions& options = {},
                                const std::function<void(const GridProgress&)>& on_progress = {});

class NoSuccessfulRuns : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stage-1 record with the lowest validation loss; ties go to fewer parameters,
/// then fewer filters, then fewer layers. Failed and stage-2 records are ignored.
GridStage1Point select_stage1_winner(std::span<const RunRecord> records);

enum class Criterion { min_loss, max_accuracy, max_f1 };

std::string to_string(Criterion c);

/// Best successful record under `criterion` with the same tie rules
/// (parameters, then row value, then layers).
const RunRecord& select_final(std::span<const RunRecord> records, Criterion criterion);

/// Writes stage<k>_{accuracy,loss,precision,recall,f1}.csv into out_dir for one
/// stage. Rows are filters/units, columns layers 1..3; the header is
/// "filters,1,2,3" or "units,1,2,3". Failed runs print "failed"; cells without a
/// record stay empty and add a warning. Returns the written paths.
std::vector<std::filesystem::path> emit_tables(std::span<const RunRecord> records, int stage,
                                               const std::filesystem::path& out_dir,
                                               std::vector<std::string>* warnings = nullptr);

}  // namespace fakespot::search

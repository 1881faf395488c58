#include "fakespot/search.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "fakespot/atomic_file.hpp"
#include "fakespot/checkpoint.hpp"

namespace fakespot::search {

namespace fs = std::filesystem;
using nlohmann::json;

nn::ModelTopology GridStage1Point::topology() const
{
    auto t = nn::make_topology(filters, conv_layers);
    t.validate();
    return t;
}

nn::ModelTopology GridStage2Point::topology() const
{
    auto t = extractor;
    t.dense_layers.assign(dense_layers, nn::DenseLayerSpec{units});
    t.validate();
    return t;
}

GridPoint::GridPoint(const GridStage1Point& p) : stage(1), row(p.filters), layers(p.conv_layers), topology(p.topology()) {}

GridPoint::GridPoint(const GridStage2Point& p) : stage(2), row(p.units), layers(p.dense_layers), topology(p.topology()) {}

std::string GridPoint::key() const
{
    return "s" + std::to_string(stage) + "-" + std::to_string(row) + "x" + std::to_string(layers);
}

std::vector<GridStage1Point> enumerate_stage1()
{
    std::vector<GridStage1Point> out;
    for (auto f : kStage1Filters) {
        for (auto l : kGridLayers) out.push_back({f, l});
    }
    return out;
}

std::vector<GridStage2Point> enumerate_stage2(const nn::ModelTopology& extractor)
{
    auto base = extractor;
    base.dense_layers.clear();
    base.validate();
    std::vector<GridStage2Point> out;
    for (auto u : kStage2Units) {
        for (auto l : kGridLayers) {
            GridStage2Point p{base, u, l};
            p.topology();
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<GridStage2Point> enumerate_stage2(const GridStage1Point& winner)
{
    return enumerate_stage2(winner.topology());
}

bool RunRecord::same_result(const RunRecord& o) const
{
    return point == o.point && descriptor == o.descriptor && seed == o.seed && epochs == o.epochs &&
           parameter_count == o.parameter_count && metrics == o.metrics && checkpoint == o.checkpoint &&
           failed == o.failed && error == o.error;
}

std::string to_json_line(const RunRecord& r)
{
    const auto& m = r.metrics;
    json j = {
        {"key", r.point.key()},
        {"stage", r.point.stage},
        {"row", r.point.row},
        {"layers", r.point.layers},
        {"topology", r.descriptor},
        {"seed", r.seed},
        {"epochs", r.epochs},
        {"parameters", r.parameter_count},
        {"tp", m.counts.tp},
        {"fp", m.counts.fp},
        {"tn", m.counts.tn},
        {"fn", m.counts.fn},
        {"accuracy", m.accuracy},
        {"precision", m.precision},
        {"recall", m.recall},
        {"f1", m.f1},
        {"loss", m.mean_loss},
        {"precision_undefined", m.precision_undefined},
        {"recall_undefined", m.recall_undefined},
        {"seconds", r.seconds},
        {"checkpoint", r.checkpoint},
        {"failed", r.failed},
        {"error", r.error},
    };
    return j.dump();
}

RunRecord from_json_line(const std::string& line)
{
    try {
        const auto j = json::parse(line);
        RunRecord r;
        r.point.stage = j.at("stage").get<int>();
        r.point.row = j.at("row").get<std::size_t>();
        r.point.layers = j.at("layers").get<std::size_t>();
        r.descriptor = j.at("topology").get<std::string>();
        r.point.topology = nn::ModelTopology::parse(r.descriptor);
        r.seed = j.at("seed").get<std::uint64_t>();
        r.epochs = j.at("epochs").get<std::size_t>();
        r.parameter_count = j.at("parameters").get<std::size_t>();
        auto& m = r.metrics;
        m.counts = {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("tn").get<std::size_t>(),
                    j.at("fn").get<std::size_t>()};
        m.accuracy = j.at("accuracy").get<double>();
        m.precision = j.at("precision").get<double>();
        m.recall = j.at("recall").get<double>();
        m.f1 = j.at("f1").get<double>();
        m.mean_loss = j.at("loss").get<double>();
        m.precision_undefined = j.at("precision_undefined").get<bool>();
        m.recall_undefined = j.at("recall_undefined").get<bool>();
        r.seconds = j.at("seconds").get<double>();
        r.checkpoint = j.at("checkpoint").get<std::string>();
        r.failed = j.at("failed").get<bool>();
        r.error = j.at("error").get<std::string>();
        return r;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("malformed run record: ") + e.what());
    }
}

namespace {

std::vector<RunRecord> read_records(const fs::path& path)
{
    std::vector<RunRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(from_json_line(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void write_records(const fs::path& path, const std::vector<RunRecord>& foreign, const std::vector<std::optional<RunRecord>>& own)
{
    std::string text;
    for (const auto& r : foreign) text += to_json_line(r) + "\n";
    for (const auto& r : own) {
        if (r) text += to_json_line(*r) + "\n";
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomically(path, text);
}

RunRecord train_point(const GridPoint& point, const data::DatasetSplit& split, const TrainConfig& config,
                      const GridOptions& options)
{
    RunRecord r;
    r.point = point;
    r.descriptor = point.topology.descriptor();
    r.seed = config.seed;
    r.epochs = config.epochs;
    r.parameter_count = point.topology.parameter_count();
    TrainConfig cfg = config;
    cfg.keep_optimizer_state = false;
    const auto start = std::chrono::steady_clock::now();
    try {
        auto result = train_model(point.topology, split, cfg);
        r.metrics = result.history.empty() ? metrics::evaluate(result.model, split.test, cfg.batch_size)
                                           : result.history.back().validation;
        if (!options.checkpoint_dir.empty()) {
            fs::create_directories(options.checkpoint_dir);
            const auto path = options.checkpoint_dir / (point.key() + ".fspt");
            save_checkpoint(result.model, path);
            r.checkpoint = path.generic_string();
        }
    } catch (const TrainingDiverged& e) {
        r.failed = true;
        r.error = e.what();
        r.metrics = {};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

std::vector<RunRecord> run_grid(std::span<const GridPoint> points, const data::DatasetSplit& split, const TrainConfig& config,
                                const GridOptions& options, const std::function<void(const GridProgress&)>& on_progress)
{
    if (split.train.empty() || split.test.empty()) throw std::invalid_argument("run_grid: train and test splits must be non-empty");
    {
        std::map<std::string, int> seen;
        for (const auto& p : points) {
            if (seen[p.key()]++) throw std::invalid_argument("run_grid: duplicate grid point " + p.key());
        }
    }

    std::vector<RunRecord> foreign;
    std::vector<std::optional<RunRecord>> own(points.size());
    if (!options.records_path.empty() && fs::exists(options.records_path)) {
        for (auto& r : read_records(options.records_path)) {
            const auto it = std::find_if(points.begin(), points.end(), [&](const GridPoint& p) { return p.key() == r.point.key(); });
            if (it == points.end()) {
                foreign.push_back(std::move(r));
                continue;
            }
            const auto i = static_cast<std::size_t>(it - points.begin());
            const bool reusable = options.resume && r.descriptor == it->topology.descriptor() && r.seed == config.seed &&
                                  r.epochs == config.epochs;
            if (reusable) own[i] = std::move(r);
        }
    }

    for (std::size_t i = 0; i < points.size(); ++i) {
        const bool reused = own[i].has_value();
        if (!reused) {
            own[i] = train_point(points[i], split, config, options);
            if (!options.records_path.empty()) write_records(options.records_path, foreign, own);
        }
        if (on_progress) on_progress({i, points.size(), &*own[i], reused});
    }
    std::vector<RunRecord> out;
    out.reserve(own.size());
    for (auto& r : own) out.push_back(std::move(*r));
    return out;
}

namespace {

auto tie_key(const RunRecord& r)
{
    return std::tuple{r.parameter_count, r.point.row, r.point.layers};
}

}  // namespace

GridStage1Point select_stage1_winner(std::span<const RunRecord> records)
{
    const RunRecord* best = nullptr;
    for (const auto& r : records) {
        if (r.failed || r.point.stage != 1) continue;
        if (!best || std::tuple{r.metrics.mean_loss, tie_key(r)} < std::tuple{best->metrics.mean_loss, tie_key(*best)}) best = &r;
    }
    if (!best) throw NoSuccessfulRuns("stage 1: every run failed or no stage-1 records were given");
    return {best->point.row, best->point.layers};
}

std::string to_string(Criterion c)
{
    switch (c) {
    case Criterion::min_loss: return "min_loss";
    case Criterion::max_accuracy: return "max_accuracy";
    case Criterion::max_f1: return "max_f1";
    }
    return "unknown";
}

const RunRecord& select_final(std::span<const RunRecord> records, Criterion criterion)
{
    // Lower score wins; maximised metrics are negated.
    auto score = [criterion](const RunRecord& r) {
        switch (criterion) {
        case Criterion::min_loss: return r.metrics.mean_loss;
        case Criterion::max_accuracy: return -r.metrics.accuracy;
        case Criterion::max_f1: return -r.metrics.f1;
        }
        return 0.0;
    };
    const RunRecord* best = nullptr;
    for (const auto& r : records) {
        if (r.failed) continue;
        if (!best || std::tuple{score(r), tie_key(r)} < std::tuple{score(*best), tie_key(*best)}) best = &r;
    }
    if (!best) throw NoSuccessfulRuns("select_final: every run failed");
    return *best;
}

std::vector<fs::path> emit_tables(std::span<const RunRecord> records, int stage, const fs::path& out_dir,
                                  std::vector<std::string>* warnings)
{
    if (stage != 1 && stage != 2) throw std::invalid_argument("emit_tables: stage must be 1 or 2");
    const std::span<const std::size_t> rows = stage == 1 ? std::span<const std::size_t>(kStage1Filters)
                                                         : std::span<const std::size_t>(kStage2Units);
    std::map<std::pair<std::size_t, std::size_t>, const RunRecord*> cells;
    for (const auto& r : records) {
        if (r.point.stage == stage) cells.emplace(std::pair{r.point.row, r.point.layers}, &r);
    }

    struct Column {
        const char* name;
        double (*value)(const metrics::MetricsReport&);
    };
    const Column metrics_out[] = {
        {"accuracy", [](const metrics::MetricsReport& m) { return m.accuracy; }},
        {"loss", [](const metrics::MetricsReport& m) { return m.mean_loss; }},
        {"precision", [](const metrics::MetricsReport& m) { return m.precision; }},
        {"recall", [](const metrics::MetricsReport& m) { return m.recall; }},
        {"f1", [](const metrics::MetricsReport& m) { return m.f1; }},
    };

    bool warned = false;
    std::vector<fs::path> written;
    fs::create_directories(out_dir);
    for (const auto& col : metrics_out) {
        std::string text = stage == 1 ? "filters" : "units";
        for (auto l : kGridLayers) text += "," + std::to_string(l);
        text += "\n";
        for (auto row : rows) {
            text += std::to_string(row);
            for (auto l : kGridLayers) {
                text += ",";
                const auto it = cells.find({row, l});
                if (it == cells.end()) {
                    if (!warned && warnings) {
                        warnings->push_back("warning: stage " + std::to_string(stage) + " has no record for " +
                                            std::to_string(row) + "x" + std::to_string(l));
                    }
                    continue;
                }
                text += it->second->failed ? "failed" : metrics::format_number(col.value(it->second->metrics));
            }
            text += "\n";
        }
        warned = true;
        const auto path = out_dir / ("stage" + std::to_string(stage) + "_" + col.name + ".csv");
        write_file_atomically(path, text);
        written.push_back(path);
    }
    return written;
}

}  // namespace fakespot::search

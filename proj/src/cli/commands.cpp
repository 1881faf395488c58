#include "fakespot/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "fakespot/atomic_file.hpp"
#include "fakespot/checkpoint.hpp"
#include "fakespot/data/image.hpp"
#include "fakespot/data/synthetic.hpp"
#include "fakespot/diffusion.hpp"

namespace fakespot::cli {

namespace fs = std::filesystem;
using metrics::format_number;

namespace {

void require_tree(const RunConfig& config)
{
    if (config.data_root.empty()) throw ConfigError("data_root is not set");
    for (const char* sub : {"train", "test"}) {
        if (!fs::is_directory(config.data_root / sub)) {
            throw data::DatasetError("data_root " + config.data_root.string() + " has no " + sub + "/ directory");
        }
    }
}

void prepare_output(const RunConfig& config)
{
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec || !fs::is_directory(config.output_dir)) {
        throw ConfigError("cannot create output_dir " + config.output_dir.string() + ": " + ec.message());
    }
}

std::vector<data::LabeledImage> capped(std::vector<data::LabeledImage> images, std::size_t per_class, SeededRng rng)
{
    return data::subsample_per_class(std::move(images), per_class, rng);
}

std::string counts_text(const data::ClassCounts& c)
{
    return std::to_string(c.total()) + " (FAKE " + std::to_string(c.fake) + ", REAL " + std::to_string(c.real) + ")";
}

}  // namespace

data::DatasetSplit load_run_data(const RunConfig& config)
{
    require_tree(config);
    auto train = data::load_png_tree(config.data_root / "train");
    if (train.empty()) throw data::DatasetError("no training images under " + (config.data_root / "train").string());
    auto test = load_test_data(config);
    return data::make_split(capped(std::move(train), config.max_train_per_class, SeededRng(config.seed).split(2)),
                            std::move(test));
}

std::vector<data::LabeledImage> load_test_data(const RunConfig& config)
{
    require_tree(config);
    auto test = data::load_png_tree(config.data_root / "test");
    if (test.empty()) throw data::DatasetError("no test images under " + (config.data_root / "test").string());
    return capped(std::move(test), config.max_test_per_class, SeededRng(config.seed).split(3));
}

TrainOutcome cmd_train(const RunConfig& config, std::ostream* log)
{
    const auto topology = nn::ModelTopology::parse(config.topology);
    require_tree(config);
    prepare_output(config);
    write_file_atomically(config.output_dir / "config.txt", render_config(config));

    const auto split = load_run_data(config);
    if (log) *log << "train " << counts_text(split.train_counts) << ", test " << counts_text(split.test_counts) << "\n";

    TrainOutcome out;
    out.epoch_log = config.output_dir / "epoch_log.csv";
    out.timing_log = config.output_dir / "epoch_timing.csv";
    out.checkpoint = config.output_dir / "model.fspt";
    std::string epoch_text = "epoch,train_loss,val_loss,val_accuracy,precision,recall,f1\n";
    std::string timing_text = "epoch,seconds\n";

    TrainConfig tc;
    tc.seed = config.seed;
    tc.batch_size = config.batch_size;
    tc.epochs = config.epochs;
    tc.adam.learning_rate = config.learning_rate;
    out.result = train_model(topology, split, tc, [&](const EpochSummary& e) {
        const auto& v = e.validation;
        epoch_text += std::to_string(e.epoch) + "," + format_number(e.train_loss) + "," + format_number(v.mean_loss) + "," +
                      format_number(v.accuracy) + "," + format_number(v.precision) + "," + format_number(v.recall) + "," +
                      format_number(v.f1) + "\n";
        timing_text += std::to_string(e.epoch) + "," + format_number(e.seconds) + "\n";
        write_file_atomically(out.epoch_log, epoch_text);
        write_file_atomically(out.timing_log, timing_text);
        if (log) {
            *log << "epoch " << e.epoch << " train_loss " << e.train_loss << " val_loss " << v.mean_loss << " val_accuracy "
                 << v.accuracy << " f1 " << v.f1 << " (" << e.seconds << " s)\n";
        }
    });
    if (config.epochs == 0) {
        write_file_atomically(out.epoch_log, epoch_text);
        write_file_atomically(out.timing_log, timing_text);
    }
    save_checkpoint(out.result.model, out.checkpoint);
    if (log) *log << "checkpoint " << out.checkpoint.generic_string() << "\n";
    return out;
}

EvaluateOutcome cmd_evaluate(const fs::path& checkpoint, const RunConfig& config, std::ostream* log)
{
    const auto model = load_checkpoint(checkpoint);
    const auto test = load_test_data(config);
    EvaluateOutcome out;
    out.report = metrics::evaluate(model, test, config.batch_size);
    prepare_output(config);
    out.report_path = config.output_dir / "evaluation.csv";
    write_file_atomically(out.report_path, metrics::csv_header() + "\n" + metrics::csv_row(out.report) + "\n");
    if (log) {
        const auto& r = out.report;
        *log << "images " << r.counts.total() << "\naccuracy " << format_number(r.accuracy) << "\nprecision "
             << format_number(r.precision) << (r.precision_undefined ? " (undefined, no positive predictions)" : "")
             << "\nrecall " << format_number(r.recall) << (r.recall_undefined ? " (undefined, no positives)" : "")
             << "\nf1 " << format_number(r.f1) << "\nloss " << format_number(r.mean_loss) << "\n";
    }
    return out;
}

namespace {

std::string describe(const search::RunRecord& r)
{
    return "key=" + r.point.key() + " topology=" + r.descriptor + " loss=" + format_number(r.metrics.mean_loss) +
           " accuracy=" + format_number(r.metrics.accuracy) + " precision=" + format_number(r.metrics.precision) +
           " recall=" + format_number(r.metrics.recall) + " f1=" + format_number(r.metrics.f1);
}

}  // namespace

GridOutcome cmd_gridsearch(const RunConfig& config, std::ostream* log)
{
    require_tree(config);
    prepare_output(config);
    write_file_atomically(config.output_dir / "config.txt", render_config(config));
    const auto split = load_run_data(config);
    if (log) *log << "train " << counts_text(split.train_counts) << ", test " << counts_text(split.test_counts) << "\n";

    TrainConfig tc;
    tc.seed = config.seed;
    tc.batch_size = config.batch_size;
    tc.epochs = config.epochs;
    tc.adam.learning_rate = config.learning_rate;
    search::GridOptions options;
    options.records_path = config.output_dir / "records.jsonl";
    options.checkpoint_dir = config.output_dir / "checkpoints";
    options.resume = config.resume;
    auto progress = [log](const search::GridProgress& p) {
        if (!log) return;
        const auto& r = *p.record;
        *log << "[" << (p.index + 1) << "/" << p.total << "] " << r.point.key() << (p.reused ? " reused" : "");
        if (r.failed) *log << " FAILED: " << r.error << "\n";
        else *log << " loss " << r.metrics.mean_loss << " accuracy " << r.metrics.accuracy << "\n";
    };

    GridOutcome out;
    const auto s1 = search::enumerate_stage1();
    const std::vector<search::GridPoint> p1(s1.begin(), s1.end());
    out.stage1 = search::run_grid(p1, split, tc, options, progress);
    out.winner = search::select_stage1_winner(out.stage1);
    if (log) *log << "stage 1 winner: " << out.winner.filters << " filters x " << out.winner.conv_layers << " layers\n";

    const auto s2 = search::enumerate_stage2(out.winner);
    const std::vector<search::GridPoint> p2(s2.begin(), s2.end());
    out.stage2 = search::run_grid(p2, split, tc, options, progress);

    std::vector<std::string> warnings;
    for (int stage : {1, 2}) {
        const auto& recs = stage == 1 ? out.stage1 : out.stage2;
        for (auto& p : search::emit_tables(recs, stage, config.output_dir / "tables", &warnings)) out.tables.push_back(p);
    }
    if (log) {
        for (const auto& w : warnings) *log << w << "\n";
    }

    std::size_t failed = 0;
    for (const auto* recs : {&out.stage1, &out.stage2}) {
        for (const auto& r : *recs) failed += r.failed ? 1 : 0;
    }
    const auto winner_it = std::find_if(out.stage1.begin(), out.stage1.end(), [&](const search::RunRecord& r) {
        return r.point.row == out.winner.filters && r.point.layers == out.winner.conv_layers;
    });
    std::string summary = "stage1_winner " + describe(*winner_it) + "\n";
    for (auto c : {search::Criterion::min_loss, search::Criterion::max_accuracy, search::Criterion::max_f1}) {
        try {
            summary += search::to_string(c) + " " + describe(search::select_final(out.stage2, c)) + "\n";
        } catch (const search::NoSuccessfulRuns&) {
            summary += search::to_string(c) + " none (every stage-2 run failed)\n";
        }
    }
    summary += "runs " + std::to_string(out.stage1.size() + out.stage2.size()) + " failed " + std::to_string(failed) + "\n";
    out.summary = config.output_dir / "summary.txt";
    write_file_atomically(out.summary, summary);
    if (log) *log << summary;
    return out;
}

std::vector<gradcam::ExplainOutcome> cmd_explain(const ExplainRequest& request)
{
    const auto model = load_checkpoint(request.checkpoint);
    if (request.options.layer && *request.options.layer >= model.topology.conv_layers.size()) {
        const auto n = model.topology.conv_layers.size();
        throw std::out_of_range("conv layer " + std::to_string(*request.options.layer) + " does not exist (valid layers: " +
                                (n == 0 ? std::string("none") : "0.." + std::to_string(n - 1)) + ")");
    }
    std::set<std::string> stems;
    for (const auto& path : request.images) {
        if (!stems.insert(gradcam::file_stem_for(path.stem().string())).second) {
            throw std::invalid_argument("two input images share the output name '" + path.stem().string() + "'");
        }
    }
    std::vector<gradcam::ExplainInput> inputs;
    std::vector<gradcam::ExplainOutcome> failures;
    for (const auto& path : request.images) {
        try {
            inputs.push_back({data::to_network_input(data::read_png(path)), path.stem().string()});
        } catch (const std::exception& e) {
            failures.push_back({path.stem().string(), {}, e.what()});
        }
    }
    auto outcomes = gradcam::explain_batch(model, inputs, request.out_dir, request.options);
    outcomes.insert(outcomes.end(), failures.begin(), failures.end());
    return outcomes;
}

void cmd_noisify(const NoisifyRequest& request)
{
    const auto schedule = diffusion::linear_schedule(request.steps);
    if (request.step < 1 || request.step > schedule.steps()) {
        throw std::out_of_range("step must lie in 1.." + std::to_string(schedule.steps()));
    }
    auto x0 = data::read_png(request.input);
    for (float& v : x0.data()) v = 2.0f * v - 1.0f;
    SeededRng rng(request.seed);
    auto noised = diffusion::noisify(x0, request.step, schedule, rng);
    for (float& v : noised.xt.data()) v = std::clamp((v + 1.0f) / 2.0f, 0.0f, 1.0f);
    data::write_png(request.output, noised.xt);
}

void cmd_synth_corpus(const SynthRequest& request)
{
    auto emit = [&](const char* part, std::size_t per_class, SeededRng rng) {
        const auto corpus = data::make_square_corpus(per_class, rng);
        const auto dir = request.out_root / part;
        fs::create_directories(dir / "FAKE");
        fs::create_directories(dir / "REAL");
        std::string squares = "file,row,col\n";
        for (std::size_t i = 0; i < corpus.images.size(); ++i) {
            const auto& img = corpus.images[i];
            char name[32];
            std::snprintf(name, sizeof name, "%06zu.png", i / 2);
            const auto rel = fs::path(img.label == data::kReal ? "REAL" : "FAKE") / name;
            data::write_png(dir / rel, img.pixels);
            if (const auto& sq = corpus.squares[i]) {
                squares += rel.generic_string() + "," + std::to_string(sq->row) + "," + std::to_string(sq->col) + "\n";
            }
        }
        write_file_atomically(dir / "squares.csv", squares);
    };
    emit("train", request.train_per_class, SeededRng(request.seed));
    emit("test", request.test_per_class, SeededRng(request.seed).split(1));
}

}  // namespace fakespot::cli

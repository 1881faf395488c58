#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fakespot/checkpoint.hpp"
#include "fakespot/cli/commands.hpp"
#include "fakespot/data/image.hpp"

namespace {

using namespace fakespot;

// Config keys exposed as --flags; values stay strings until resolve_config.
struct ConfigFlags {
    std::optional<std::string> file;
    cli::ConfigValues values;

    void attach(CLI::App& app, bool training)
    {
        app.add_option("--config", file, "key=value config file (command-line flags take precedence)");
        add(app, "--data-root", "data_root", "dataset root holding train/ and test/");
        add(app, "--seed", "seed", "random seed (default 1)");
        add(app, "--batch-size", "batch_size", "mini-batch size (default 32)");
        add(app, "--output-dir", "output_dir", "output directory (default out)");
        add(app, "--max-test-per-class", "max_test_per_class", "cap on test images per class (0 = all)");
        if (!training) return;
        add(app, "--epochs", "epochs", "training epochs (default 10)");
        add(app, "--learning-rate", "learning_rate", "Adam learning rate (default 0.001)");
        add(app, "--topology", "topology", "topology descriptor, e.g. in=3x32x32;conv=32@3x3,32@3x3;pool=max2;dense=64");
        add(app, "--max-train-per-class", "max_train_per_class", "cap on training images per class (0 = all)");
        app.add_flag_function("--resume", [this](std::int64_t) { values["resume"] = "true"; }, "reuse finished grid records");
    }

    void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help)
    {
        app.add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }

    cli::RunConfig resolve() const
    {
        return cli::resolve_config(file ? std::optional<std::filesystem::path>(*file) : std::nullopt, values);
    }
};

std::string error_kind(const std::exception& e)
{
    if (dynamic_cast<const CheckpointError*>(&e)) return "checkpoint";
    if (dynamic_cast<const cli::ConfigError*>(&e)) return "config";
    if (dynamic_cast<const data::DatasetError*>(&e)) return "dataset";
    if (dynamic_cast<const data::ImageError*>(&e)) return "image";
    if (dynamic_cast<const TrainingDiverged*>(&e)) return "diverged";
    if (dynamic_cast<const std::out_of_range*>(&e)) return "out_of_range";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    return "runtime";
}

void report_error(const std::string& command, const std::string& kind, const std::string& message)
{
    std::cerr << nlohmann::json{{"command", command}, {"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Real-versus-generated image classification: training, evaluation, topology search and Grad-CAM."};
    app.require_subcommand(1);

    ConfigFlags train_flags, eval_flags, grid_flags;
    auto* train = app.add_subcommand("train", "train one topology and write its checkpoint and epoch logs");
    train_flags.attach(*train, true);

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
    std::string eval_checkpoint;
    evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    eval_flags.attach(*evaluate, false);

    auto* grid = app.add_subcommand("grid-search", "run the two-stage topology search (36 networks)");
    grid_flags.attach(*grid, true);

    auto* explain = app.add_subcommand("explain", "write Grad-CAM overlays and heatmaps for PNG images");
    cli::ExplainRequest ex;
    std::string ex_checkpoint, ex_out = "explain";
    std::vector<std::string> ex_images;
    std::optional<std::size_t> ex_layer;
    std::optional<std::string> ex_class;
    explain->add_option("--checkpoint", ex_checkpoint, "checkpoint file")->required();
    explain->add_option("--output-dir", ex_out, "output directory (default explain)");
    explain->add_option("--layer", ex_layer, "conv layer index (default: last)");
    explain->add_option("--class", ex_class, "class to explain: REAL or FAKE (default: predicted)")
        ->check(CLI::IsMember({"REAL", "FAKE"}));
    explain->add_option("--alpha", ex.options.alpha, "overlay opacity in [0, 1] (default 0.5)")->check(CLI::Range(0.0, 1.0));
    explain->add_option("--enlarge", ex.options.enlarge, "also write nearest-neighbour copies enlarged by this factor");
    explain->add_option("images", ex_images, "input PNG files")->required();

    auto* noisify = app.add_subcommand("noisify", "apply forward diffusion noise to a PNG image");
    cli::NoisifyRequest nz;
    std::string nz_in, nz_out;
    noisify->add_option("input", nz_in, "input PNG")->required();
    noisify->add_option("output", nz_out, "output PNG")->required();
    noisify->add_option("--step", nz.step, "1-based diffusion step")->required();
    noisify->add_option("--steps", nz.steps, "schedule length (default 50)");
    noisify->add_option("--seed", nz.seed, "noise seed (default 1)");

    auto* synth = app.add_subcommand("synth-corpus", "write the synthetic bright-square corpus as a PNG dataset tree");
    cli::SynthRequest sy;
    std::string sy_out;
    synth->add_option("output", sy_out, "dataset root to create")->required();
    synth->add_option("--train-per-class", sy.train_per_class, "training images per class (default 3000)");
    synth->add_option("--test-per-class", sy.test_per_class, "test images per class (default 100)");
    synth->add_option("--seed", sy.seed, "corpus seed (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (*train) {
            cli::cmd_train(train_flags.resolve(), &std::cout);
        } else if (*evaluate) {
            cli::cmd_evaluate(eval_checkpoint, eval_flags.resolve(), &std::cout);
        } else if (*grid) {
            cli::cmd_gridsearch(grid_flags.resolve(), &std::cout);
        } else if (*explain) {
            ex.checkpoint = ex_checkpoint;
            ex.out_dir = ex_out;
            ex.options.layer = ex_layer;
            if (ex_class) ex.options.target_class = *ex_class == "REAL" ? data::kReal : data::kFake;
            ex.images.assign(ex_images.begin(), ex_images.end());
            bool ok = true;
            for (const auto& o : cli::cmd_explain(ex)) {
                if (!o.error.empty()) {
                    ok = false;
                    report_error(command, "image", o.source_id + ": " + o.error);
                    continue;
                }
                for (const auto& f : o.files) std::cout << f.generic_string() << "\n";
            }
            return ok ? 0 : 1;
        } else if (*noisify) {
            nz.input = nz_in;
            nz.output = nz_out;
            cli::cmd_noisify(nz);
        } else if (*synth) {
            sy.out_root = sy_out;
            cli::cmd_synth_corpus(sy);
        }
    } catch (const std::exception& e) {
        report_error(command, error_kind(e), e.what());
        return 1;
    }
    return 0;
}

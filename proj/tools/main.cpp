#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fatigue/cli.hpp"
#include "fatigue/errors.hpp"
#include "fatigue/version.hpp"

namespace {

using fatigue::cli::RunConfig;

struct CommonFlags {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON run configuration");
    cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
    cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
    cmd->add_option("--workers", flags.workers,
                    "worker threads (overrides config)");
}

RunConfig resolve_config(const CommonFlags& flags) {
    RunConfig cfg = flags.config_path
                        ? fatigue::cli::load_run_config(*flags.config_path)
                        : fatigue::cli::run_config_from_json_text("{}");
    if (flags.seed) {
        cfg.seed = *flags.seed;
    }
    if (flags.out_dir) {
        cfg.output_dir = *flags.out_dir;
    }
    if (flags.workers) {
        if (*flags.workers == 0) {
            throw fatigue::ConfigError("workers must be at least 1");
        }
        cfg.workers = *flags.workers;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fatigue life model pipeline"};
    app.set_version_flag("--version",
                         std::string(fatigue::kToolName) + " " +
                             fatigue::kToolVersion);
    app.require_subcommand(1);

    CommonFlags prepare_flags;
    CLI::App* prepare = app.add_subcommand(
        "prepare", "load the dataset, screen and filter it, write the splits");
    add_common(prepare, prepare_flags);

    CommonFlags train_flags;
    CLI::App* train = app.add_subcommand(
        "train", "train one network on the filtered dataset");
    add_common(train, train_flags);

    CommonFlags cv_flags;
    CLI::App* cv = app.add_subcommand(
        "cv", "k-fold cross-validation of one configuration");
    add_common(cv, cv_flags);

    CommonFlags grid_flags;
    CLI::App* grid = app.add_subcommand(
        "grid", "hyperparameter grid search (resumable)");
    add_common(grid, grid_flags);

    CommonFlags pdp_flags;
    std::string pdp_model;
    CLI::App* pdp = app.add_subcommand(
        "pdp", "partial dependence surfaces from a trained model");
    add_common(pdp, pdp_flags);
    pdp->add_option("--model", pdp_model, "trained model file")->required();

    CommonFlags predict_flags;
    std::string predict_model;
    std::string predict_input;
    CLI::App* predict = app.add_subcommand(
        "predict", "predict fatigue life for a CSV of mix designs");
    add_common(predict, predict_flags);
    predict->add_option("--model", predict_model, "trained model file")->required();
    predict->add_option("--input", predict_input,
                        "CSV with header binder_content,air_voids,strain_microstrain")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? fatigue::cli::kExitOk : fatigue::cli::kExitConfig;
    }

    try {
        if (prepare->parsed()) {
            return fatigue::cli::cmd_prepare(resolve_config(prepare_flags));
        }
        if (train->parsed()) {
            return fatigue::cli::cmd_train(resolve_config(train_flags));
        }
        if (cv->parsed()) {
            return fatigue::cli::cmd_cv(resolve_config(cv_flags));
        }
        if (grid->parsed()) {
            return fatigue::cli::cmd_grid(resolve_config(grid_flags));
        }
        if (pdp->parsed()) {
            return fatigue::cli::cmd_pdp(resolve_config(pdp_flags), pdp_model);
        }
        if (predict->parsed()) {
            return fatigue::cli::cmd_predict(resolve_config(predict_flags),
                                             predict_model, predict_input);
        }
    } catch (const fatigue::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return fatigue::cli::kExitConfig;
    } catch (const fatigue::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return fatigue::cli::kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fatigue::cli::kExitFailure;
    }
    return fatigue::cli::kExitFailure;
}

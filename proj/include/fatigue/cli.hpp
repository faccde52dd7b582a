#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fatigue/dataset.hpp"
#include "fatigue/network.hpp"
#include "fatigue/search.hpp"
#include "fatigue/training.hpp"

namespace fatigue::cli {

struct TrainSettings {
    TrainConfig cfg;
    // Hold-out split for the train command: either a fraction of the data
    // (seeded shuffle) or one named fold of the cv split.
    double validation_fraction = 0.25;
    std::optional<std::size_t> validation_fold;
};

struct SliceSpec {
    std::string vary;
    std::map<std::string, std::string> fix;
};

struct GridSettings {
    std::vector<LossKind> losses;
    std::vector<OptimizerKind> optimizers;
    std::vector<Activation> activations;
    std::vector<std::size_t> hidden_layers;
    std::vector<std::size_t> neurons;
    std::size_t epochs = 300000;
    std::size_t batch_size = 32;
    std::vector<SliceSpec> slices;
};

struct PdpSettings {
    std::vector<double> strain_levels{200.0, 400.0};
    std::size_t resolution = 50;
    double coverage_radius = 0.1;
};

/// The whole declarative run configuration. Every field has a default; the
/// resolved config (defaults made explicit) is echoed into each output
/// directory. Unknown keys in the file are a hard error.
struct RunConfig {
    std::string dataset = "data/asphalt_fatigue.csv";
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::string output_dir = "out";
    FilterConfig filter;
    NetworkConfig network;
    TrainSettings train;
    std::size_t cv_folds = 4;
    bool cv_in_sample = false;
    GridSettings grid;
    PdpSettings pdp;
};

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json_text(const std::string& text);
std::string run_config_to_json(const RunConfig& cfg);

/// Commands. Each writes its outputs plus resolved_config.json into
/// cfg.output_dir and returns a process exit code (0 = success,
/// 4 = non-convergence). Config and data problems are thrown as
/// ConfigError / DataError and mapped to exit codes by the entry point.
int cmd_prepare(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_cv(const RunConfig& cfg);
int cmd_grid(const RunConfig& cfg);
int cmd_pdp(const RunConfig& cfg, const std::string& model_path);
int cmd_predict(const RunConfig& cfg, const std::string& model_path,
                const std::string& input_path);

/// Exit codes shared by the tool and its tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNonConvergence = 4;

} // namespace fatigue::cli

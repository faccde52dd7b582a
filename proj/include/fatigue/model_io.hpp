#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fatigue/dataset.hpp"
#include "fatigue/network.hpp"
#include "fatigue/training.hpp"

namespace fatigue {

/// Everything needed to re-run or audit a training run.
struct TrainProvenance {
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string dataset_hash;
    TrainConfig train_config;
    std::size_t best_epoch = 0;
    bool converged = true;
    // (binder, voids) of the training samples; drawn on top of dependence
    // surfaces and used for the coverage mask.
    std::vector<std::array<double, 2>> training_points;
    std::array<double, 2> strain_range{0.0, 0.0};
};

struct ModelFile {
    NetworkConfig config;
    Network network;
    ScalerParams scaler;
    TrainProvenance provenance;
};

/// JSON serialization. Doubles are written with enough digits to round-trip
/// bit-exactly; save/load/save is byte-stable.
std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(const std::string& text);

void save_model(const ModelFile& model, const std::string& path);
/// Throws DataError on unreadable, corrupt, or shape-inconsistent files.
ModelFile load_model(const std::string& path);

} // namespace fatigue

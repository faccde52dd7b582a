#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fatigue/dataset.hpp"
#include "fatigue/network.hpp"
#include "fatigue/training.hpp"

namespace fatigue {

struct GridSpec {
    std::vector<LossKind> losses;
    std::vector<OptimizerKind> optimizers;
    std::vector<Activation> activations;
    std::vector<std::size_t> hidden_layers;
    std::vector<std::size_t> neurons;
    std::size_t epochs = 300000;
    std::size_t folds = 4;
    std::uint64_t seed = 0;
    std::size_t batch_size = 32;
    std::size_t divergence_patience = 10;
    // Shared learning rates; the optimizer kind varies along the grid axis.
    OptimizerConfig rates;

    void validate() const;

    /// The full study grid: {mse, msle} x {adam, nadam, rmsprop} x
    /// {relu, linear, sigmoid} x {1,2,3,4} x {10,50,100,150,200}.
    static GridSpec study_grid();
};

struct GridEntry {
    NetworkConfig net;
    TrainConfig train;
};

/// Cartesian product in deterministic lexicographic order: loss, optimizer,
/// activation, hidden layers, neurons (each axis in its given order).
std::vector<GridEntry> enumerate_grid(const GridSpec& spec);

/// Stable 16-hex identifier of one configuration (budget included), used as
/// the resume key in the results store.
std::string config_hash(const GridEntry& entry);

std::size_t parameter_count(const NetworkConfig& cfg);

struct GridRecord {
    std::string hash;
    GridEntry entry;
    std::vector<std::optional<double>> fold_r2;
    std::vector<bool> fold_converged;
    std::optional<double> mean_r2;
    std::size_t n_converged = 0;
    std::uint64_t seed = 0; // per-config seed, derived from (grid seed, hash)
    std::size_t epochs_used = 0;
    double wall_s = 0.0;
    bool from_store = false; // true when resumed, not recomputed
};

struct GridResult {
    std::vector<GridRecord> records; // enumeration order
    /// Indices into records, best mean R2 first. Ties break toward fewer
    /// parameters, then enumeration order. Records without a mean R2
    /// (no converged folds) are listed but unranked.
    std::vector<std::size_t> ranking;
};

/// Runs cross-validation for every configuration, streaming one JSON line
/// per finished config to store_path (append; single writer) so an
/// interrupted run resumes by config hash. Worker threads split configs;
/// per-config seeds make results independent of scheduling.
GridResult run_grid(const std::vector<Sample>& samples, const GridSpec& spec,
                    const std::string& store_path, std::size_t workers,
                    std::ostream* progress = nullptr);

/// One grid record as a JSON line (no trailing newline).
std::string grid_record_to_json(const GridRecord& record);
GridRecord grid_record_from_json(const std::string& line);

struct SliceRow {
    std::string axis_value;
    std::optional<double> mean_r2;
    std::size_t n_converged = 0;
};

/// 1-D slice through the grid: vary one axis, pin every other axis to the
/// value given in `fixed` (keys: loss, optimizer, activation, n_hidden,
/// neurons). Throws ConfigError when the fixed point is not in the grid.
std::vector<SliceRow> slice_report(const GridResult& result, const std::string& vary,
                                   const std::map<std::string, std::string>& fixed);

/// Slice as CSV: "axis_value,mean_r2,n_converged".
std::string slice_to_csv(const std::vector<SliceRow>& rows);

} // namespace fatigue

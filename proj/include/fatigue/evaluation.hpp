#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fatigue/dataset.hpp"
#include "fatigue/model_io.hpp"
#include "fatigue/network.hpp"
#include "fatigue/training.hpp"

namespace fatigue {

/// Coefficient of determination: 1 - SS_res/SS_tot. May be negative; 1 only
/// for a perfect fit. Throws DataError("degenerate target variance") when
/// the targets are all identical.
double r_squared(std::span<const double> y_true, std::span<const double> y_pred);

struct FoldResult {
    std::size_t fold_index = 0;
    bool converged = false;
    /// Suppressed (not fabricated) for non-converged folds and folds whose
    /// targets carry no variance (size 1 included).
    std::optional<double> r2;
    std::size_t best_epoch = 0;
    std::vector<std::pair<double, double>> pairs; // held-out (true, predicted)
};

struct CvReport {
    std::vector<FoldResult> folds;
    std::size_t n_folds = 0;
    std::uint64_t seed = 0;
    std::size_t n_converged = 0;
    /// Mean fold R2 over converged folds that have one.
    std::optional<double> mean_r2;
    /// R2 of the pooled out-of-fold pairs from converged folds: the honest
    /// "entire dataset" analog.
    std::optional<double> pooled_r2;
    /// Optional apples-to-apples mode: mean over converged folds of each
    /// fold model's R2 on the full dataset (its own training data included).
    std::optional<double> in_sample_r2;
};

struct CvOptions {
    std::size_t n_folds = 4;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool compute_in_sample = false;
    std::string dataset_hash; // copied into fold model provenance
};

/// K-fold cross-validation. Per fold: fit the scaler on the training folds
/// only, train a fresh network, predict the held-out fold through the same
/// path as predict(). Fold network/shuffle seeds derive from (seed, fold),
/// so results do not depend on execution order. When fold_models is given
/// it receives one ModelFile per fold, indexed by fold.
CvReport cross_validate(const std::vector<Sample>& samples,
                        const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
                        const CvOptions& options,
                        std::vector<ModelFile>* fold_models = nullptr);

struct PredictionRow {
    double value = 0.0;       // clamped to >= 0; cycle counts cannot be negative
    bool extrapolated = false; // any input outside the stored training ranges
};

/// Applies the stored scaler, runs the network, clamps at zero and flags
/// extrapolation. Inputs are raw (binder %, voids %, strain microstrain).
std::vector<PredictionRow> predict(const ModelFile& model,
                                   const std::vector<std::array<double, 3>>& inputs);

/// CvReport as JSON text (stable field order).
std::string cv_report_to_json(const CvReport& report, const std::string& dataset_hash);

/// Pooled pairs as CSV: "fold,true_nf,pred_nf".
std::string true_vs_pred_csv(const CvReport& report);

} // namespace fatigue

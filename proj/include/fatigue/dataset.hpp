#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fatigue/matrix.hpp"

namespace fatigue {

/// One fatigue test record. Strain is in microstrain (x1e-6 m/m),
/// fatigue_life in load cycles. Temperatures arrive in Celsius except the
/// literal 70 (a Fahrenheit leftover), converted to 21.1 at ingestion.
struct Sample {
    double binder_content = 0.0; // percent by mass
    double air_voids = 0.0;      // percent by volume
    double strain = 0.0;         // microstrain
    double temperature_c = 0.0;
    double frequency_hz = 0.0;
    double fatigue_life = 0.0;   // cycles to failure
    std::string source_id;

    /// The modeling subset is restricted to 20 / 21.1 degC and 10 Hz.
    bool matches_fixed_conditions() const;
};

struct FilterConfig {
    double nf_lower_bound = 2e3;
    double nf_upper_bound = 2e6;
    double z_threshold = 3.0;
    // Percentile mode recomputes the fatigue-life bounds from the data
    // instead of using the fixed values above.
    bool percentile_bounds = false;
    double lower_percentile = 3.0;
    double upper_percentile = 90.0;

    void validate() const;
};

struct RejectedSample {
    Sample sample;
    std::string reason;
};

struct FilterResult {
    std::vector<Sample> retained;
    std::vector<RejectedSample> rejected;
    // Bounds actually applied (identical to the config in fixed mode,
    // computed from the data in percentile mode).
    double applied_lower = 0.0;
    double applied_upper = 0.0;
};

struct ScalerParams {
    struct Range {
        double min = 0.0;
        double max = 0.0;
    };
    Range binder;
    Range voids;
    Range strain;
};

struct FoldAssignment {
    std::size_t n_folds = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> assignment; // per-sample fold index
};

/// Expected CSV header, in this exact column order.
extern const char* const kCsvHeader;

/// Parses the dataset CSV. Row order preserved; dot-decimal parsing
/// independent of locale. Throws DataError on a missing file, a malformed
/// row (message names the data row and column), or a non-positive
/// fatigue life.
std::vector<Sample> load_csv(const std::string& path);

/// Serializes samples back to the CSV schema (with header).
std::string samples_to_csv(const std::vector<Sample>& samples);

/// Two-stage outlier filter. Stage 1 drops samples with fatigue life
/// outside [lower, upper] (inclusive). Stage 2 computes mean and population
/// standard deviation of binder content, air voids, strain and fatigue life
/// over the stage-1 survivors and drops samples with |z| > z_threshold in
/// any of them; constant columns are skipped. Throws DataError when nothing
/// survives.
FilterResult filter_outliers(const std::vector<Sample>& samples,
                             const FilterConfig& cfg);

/// Per-feature min/max of (binder, voids, strain) over the given samples.
ScalerParams fit_scaler(const std::vector<Sample>& train);

/// Min-max transform of the three model inputs: x' = (x-min)/(max-min).
/// Degenerate features (min = max) map to 0. Values outside the fitted
/// range pass through unclipped. Rows = samples, cols = [binder, voids,
/// strain]. The target is never scaled.
Matrix transform(const std::vector<Sample>& samples, const ScalerParams& params);
std::array<double, 3> transform_one(double binder, double voids, double strain,
                                    const ScalerParams& params);

std::vector<double> fatigue_lives(const std::vector<Sample>& samples);

/// Seeded shuffle, then contiguous partition: the first (n mod k) folds get
/// the extra sample. Same (n, k, seed) always produces the same assignment.
FoldAssignment kfold_split(std::size_t n_samples, std::size_t n_folds,
                           std::uint64_t seed);

} // namespace fatigue

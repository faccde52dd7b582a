#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fatigue/evaluation.hpp"
#include "fatigue/matrix.hpp"
#include "fatigue/model_io.hpp"

namespace fatigue {

/// Model predictions over a (binder x voids) grid at one fixed strain level,
/// with a mask telling which cells are supported by nearby training data.
struct PdpSurface {
    double strain_level = 0.0;
    std::vector<double> binder_axis; // ascending, spans observed range
    std::vector<double> voids_axis;  // ascending, spans observed range
    Matrix predictions;              // rows = binder axis, cols = voids axis
    std::vector<std::uint8_t> coverage; // row-major, parallels predictions
    std::vector<std::array<double, 2>> data_points; // raw (binder, voids)

    bool covered(std::size_t bi, std::size_t vi) const {
        return coverage[bi * voids_axis.size() + vi] != 0;
    }
};

/// Cell is covered iff a data point lies within Euclidean distance `radius`
/// of it; both in min-max-scaled coordinates. Empty data -> all false.
std::vector<std::uint8_t> coverage_mask(
    const std::vector<std::array<double, 2>>& grid_points_scaled,
    const std::vector<std::array<double, 2>>& data_points_scaled, double radius);

/// Conditional dependence slice: predictions on a resolution x resolution
/// grid spanning exactly the training (binder, voids) ranges, strain held at
/// strain_level. A strain level outside the training range throws
/// DataError("strain extrapolation refused"). Cell predictions are the
/// predict() outputs, no separate code path.
PdpSurface partial_dependence(const ModelFile& model, double strain_level,
                              std::size_t resolution, double coverage_radius);

struct TrendSummary {
    double spearman_binder = 0.0; // prediction vs binder over covered cells
    double spearman_voids = 0.0;  // prediction vs voids over covered cells
    std::size_t covered_cells = 0;
    std::array<double, 3> argmax{0.0, 0.0, 0.0}; // (binder, voids, prediction)
    std::array<double, 3> argmin{0.0, 0.0, 0.0};
};

/// Ordinal trends over the covered region. Fewer than 3 covered cells throws
/// DataError("trend undefined"). All-tied inputs give correlation 0.
TrendSummary qualitative_trends(const PdpSurface& surface);

/// Spearman rank correlation with average ranks for ties; 0 by convention
/// when either side is completely tied.
double spearman(std::span<const double> a, std::span<const double> b);

/// Long-format CSV: "binder,voids,pred_nf,covered", binder-major order.
std::string surface_to_csv(const PdpSurface& surface);

/// Sidecar JSON: strain level, model hash, radius, resolution, trends.
std::string surface_sidecar_json(const PdpSurface& surface,
                                 const std::string& model_hash, double radius,
                                 std::size_t resolution);

/// Training points as CSV: "binder,voids" (the overlay markers).
std::string data_points_csv(const PdpSurface& surface);

} // namespace fatigue

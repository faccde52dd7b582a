#include "fatigue/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fatigue/errors.hpp"
#include "fatigue/io_util.hpp"

namespace fatigue {

using nlohmann::json;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out;
    out.reserve(n);
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(lo + (hi - lo) * frac);
    }
    return out;
}

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) {
            ++j;
        }
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[idx[k]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0;
    double va = 0.0;
    double vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) {
        return 0.0; // all-tied side: correlation 0 by convention
    }
    return cov / std::sqrt(va * vb);
}

} // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("spearman: length mismatch or too few points");
    }
    return pearson(average_ranks(a), average_ranks(b));
}

std::vector<std::uint8_t> coverage_mask(
    const std::vector<std::array<double, 2>>& grid_points_scaled,
    const std::vector<std::array<double, 2>>& data_points_scaled, double radius) {
    if (!(radius > 0.0)) {
        throw ConfigError("coverage radius must be positive");
    }
    std::vector<std::uint8_t> mask(grid_points_scaled.size(), 0);
    const double r2 = radius * radius;
    for (std::size_t g = 0; g < grid_points_scaled.size(); ++g) {
        for (const auto& d : data_points_scaled) {
            const double db = grid_points_scaled[g][0] - d[0];
            const double dv = grid_points_scaled[g][1] - d[1];
            if (db * db + dv * dv <= r2) {
                mask[g] = 1;
                break;
            }
        }
    }
    return mask;
}

PdpSurface partial_dependence(const ModelFile& model, double strain_level,
                              std::size_t resolution, double coverage_radius) {
    if (resolution == 0) {
        throw ConfigError("resolution must be positive");
    }
    if (!(coverage_radius > 0.0)) {
        throw ConfigError("coverage radius must be positive");
    }
    const auto& strain_range = model.provenance.strain_range;
    if (!(strain_level >= strain_range[0] && strain_level <= strain_range[1])) {
        throw DataError("strain extrapolation refused");
    }

    PdpSurface surface;
    surface.strain_level = strain_level;
    surface.binder_axis =
        linspace(model.scaler.binder.min, model.scaler.binder.max, resolution);
    surface.voids_axis =
        linspace(model.scaler.voids.min, model.scaler.voids.max, resolution);
    surface.data_points = model.provenance.training_points;

    std::vector<std::array<double, 3>> cells;
    cells.reserve(resolution * resolution);
    for (double b : surface.binder_axis) {
        for (double v : surface.voids_axis) {
            cells.push_back({b, v, strain_level});
        }
    }
    const auto preds = predict(model, cells);
    surface.predictions.resize(resolution, resolution);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        surface.predictions.data[i] = preds[i].value;
    }

    std::vector<std::array<double, 2>> grid_scaled;
    grid_scaled.reserve(cells.size());
    for (const auto& c : cells) {
        const auto s = transform_one(c[0], c[1], strain_level, model.scaler);
        grid_scaled.push_back({s[0], s[1]});
    }
    std::vector<std::array<double, 2>> data_scaled;
    data_scaled.reserve(surface.data_points.size());
    for (const auto& d : surface.data_points) {
        const auto s = transform_one(d[0], d[1], strain_level, model.scaler);
        data_scaled.push_back({s[0], s[1]});
    }
    surface.coverage = coverage_mask(grid_scaled, data_scaled, coverage_radius);
    return surface;
}

TrendSummary qualitative_trends(const PdpSurface& surface) {
    std::vector<double> binder;
    std::vector<double> voids;
    std::vector<double> pred;
    for (std::size_t bi = 0; bi < surface.binder_axis.size(); ++bi) {
        for (std::size_t vi = 0; vi < surface.voids_axis.size(); ++vi) {
            if (!surface.covered(bi, vi)) {
                continue;
            }
            binder.push_back(surface.binder_axis[bi]);
            voids.push_back(surface.voids_axis[vi]);
            pred.push_back(surface.predictions.at(bi, vi));
        }
    }
    if (binder.size() < 3) {
        throw DataError("trend undefined");
    }
    TrendSummary t;
    t.covered_cells = binder.size();
    t.spearman_binder = spearman(binder, pred);
    t.spearman_voids = spearman(voids, pred);
    std::size_t imax = 0;
    std::size_t imin = 0;
    for (std::size_t i = 1; i < pred.size(); ++i) {
        if (pred[i] > pred[imax]) {
            imax = i;
        }
        if (pred[i] < pred[imin]) {
            imin = i;
        }
    }
    t.argmax = {binder[imax], voids[imax], pred[imax]};
    t.argmin = {binder[imin], voids[imin], pred[imin]};
    return t;
}

std::string surface_to_csv(const PdpSurface& surface) {
    std::ostringstream out;
    out << "binder,voids,pred_nf,covered\n";
    for (std::size_t bi = 0; bi < surface.binder_axis.size(); ++bi) {
        for (std::size_t vi = 0; vi < surface.voids_axis.size(); ++vi) {
            out << format_double(surface.binder_axis[bi]) << ','
                << format_double(surface.voids_axis[vi]) << ','
                << format_double(surface.predictions.at(bi, vi)) << ','
                << (surface.covered(bi, vi) ? '1' : '0') << '\n';
        }
    }
    return out.str();
}

std::string surface_sidecar_json(const PdpSurface& surface,
                                 const std::string& model_hash, double radius,
                                 std::size_t resolution) {
    json j{
        {"strain_level", surface.strain_level},
        {"model_hash", model_hash},
        {"coverage_radius", radius},
        {"resolution", resolution},
        {"binder_range", {surface.binder_axis.front(), surface.binder_axis.back()}},
        {"voids_range", {surface.voids_axis.front(), surface.voids_axis.back()}},
    };
    try {
        const TrendSummary t = qualitative_trends(surface);
        j["trends"] = json{
            {"covered_cells", t.covered_cells},
            {"spearman_binder", t.spearman_binder},
            {"spearman_voids", t.spearman_voids},
            {"argmax", t.argmax},
            {"argmin", t.argmin},
        };
    } catch (const DataError&) {
        j["trends"] = nullptr; // fewer than 3 covered cells
    }
    return j.dump(2) + "\n";
}

std::string data_points_csv(const PdpSurface& surface) {
    std::ostringstream out;
    out << "binder,voids\n";
    for (const auto& d : surface.data_points) {
        out << format_double(d[0]) << ',' << format_double(d[1]) << '\n';
    }
    return out.str();
}

} // namespace fatigue

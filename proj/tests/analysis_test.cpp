#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fatigue/analysis.hpp"
#include "fatigue/errors.hpp"
#include "fatigue/network.hpp"

namespace fatigue {
namespace {

TEST(Spearman, MonotoneIsOne) {
    const std::vector<double> a{1.0, 2.0, 5.0, 9.0};
    std::vector<double> b;
    for (double v : a) {
        b.push_back(std::exp(v)); // any strictly increasing map
    }
    EXPECT_DOUBLE_EQ(spearman(a, b), 1.0);
    std::vector<double> rev(b.rbegin(), b.rend());
    EXPECT_DOUBLE_EQ(spearman(a, rev), -1.0);
}

TEST(Spearman, TiesUseAverageRanks) {
    const std::vector<double> a{1.0, 2.0, 2.0, 3.0};
    const std::vector<double> b{1.0, 2.0, 3.0, 4.0};
    // ranks of a: 1, 2.5, 2.5, 4 -> 3/sqrt(10)
    EXPECT_NEAR(spearman(a, b), 0.9486832980505138, 1e-15);
}

TEST(Spearman, AllTiedSideGivesZero) {
    const std::vector<double> a{5.0, 5.0, 5.0, 5.0};
    const std::vector<double> b{1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(spearman(a, b), 0.0);
    EXPECT_DOUBLE_EQ(spearman(b, a), 0.0);
}

TEST(Spearman, RejectsBadShapes) {
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{1.0};
    EXPECT_THROW(spearman(a, b), std::invalid_argument);
    EXPECT_THROW(spearman(b, b), std::invalid_argument); // too few points
}

// ---------------------------------------------------------- coverage mask

std::vector<std::array<double, 2>> unit_grid_3x3() {
    std::vector<std::array<double, 2>> grid;
    for (double x : {0.0, 0.5, 1.0}) {
        for (double y : {0.0, 0.5, 1.0}) {
            grid.push_back({x, y});
        }
    }
    return grid;
}

TEST(CoverageMask, CenterPointSmallRadius) {
    const auto grid = unit_grid_3x3();
    const std::vector<std::array<double, 2>> data{{0.5, 0.5}};
    const auto mask = coverage_mask(grid, data, 0.3);
    // edge midpoints are 0.5 away, corners ~0.707; only the center is inside
    std::size_t covered = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        covered += mask[i];
        EXPECT_EQ(mask[i] != 0, grid[i][0] == 0.5 && grid[i][1] == 0.5);
    }
    EXPECT_EQ(covered, 1u);
}

TEST(CoverageMask, GrowsMonotonicallyWithRadius) {
    const auto grid = unit_grid_3x3();
    const std::vector<std::array<double, 2>> data{{0.5, 0.5}};
    const auto small = coverage_mask(grid, data, 0.3);
    const auto mid = coverage_mask(grid, data, 0.55);
    const auto large = coverage_mask(grid, data, 0.75);
    std::size_t n_small = 0, n_mid = 0, n_large = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        n_small += small[i];
        n_mid += mid[i];
        n_large += large[i];
        EXPECT_LE(small[i], mid[i]);
        EXPECT_LE(mid[i], large[i]);
    }
    EXPECT_EQ(n_small, 1u); // center
    EXPECT_EQ(n_mid, 5u);   // + edge midpoints at distance 0.5
    EXPECT_EQ(n_large, 9u); // + corners at distance ~0.707
}

TEST(CoverageMask, BoundaryDistanceCounts) {
    const std::vector<std::array<double, 2>> grid{{3.0, 4.0}};
    const std::vector<std::array<double, 2>> data{{0.0, 0.0}};
    EXPECT_EQ(coverage_mask(grid, data, 5.0)[0], 1); // 3-4-5 triangle, exact
    EXPECT_EQ(coverage_mask(grid, data, 4.9)[0], 0);
}

TEST(CoverageMask, EmptyDataCoversNothing) {
    const auto mask = coverage_mask(unit_grid_3x3(), {}, 10.0);
    for (auto m : mask) {
        EXPECT_EQ(m, 0);
    }
}

TEST(CoverageMask, RejectsNonPositiveRadius) {
    EXPECT_THROW(coverage_mask(unit_grid_3x3(), {}, 0.0), ConfigError);
    EXPECT_THROW(coverage_mask(unit_grid_3x3(), {}, -1.0), ConfigError);
}

// ------------------------------------------------------ dependence surface

ModelFile surface_model(double w_binder, double w_voids, double w_strain,
                        double bias) {
    ModelFile m;
    Layer l;
    l.weights.resize(1, 3);
    l.weights.data = {w_binder, w_voids, w_strain};
    l.bias = {bias};
    l.activation = Activation::kLinear;
    m.network.layers.push_back(std::move(l));
    m.scaler.binder = {4.0, 6.0};
    m.scaler.voids = {1.0, 9.0};
    m.scaler.strain = {100.0, 900.0};
    m.provenance.strain_range = {100.0, 900.0};
    m.provenance.training_points = {{5.0, 5.0}};
    return m;
}

TEST(PartialDependence, AxesSpanTheTrainingRanges) {
    const ModelFile m = surface_model(1.0, 0.0, 0.0, 0.5);
    const PdpSurface s = partial_dependence(m, 400.0, 50, 2.0);
    ASSERT_EQ(s.binder_axis.size(), 50u);
    ASSERT_EQ(s.voids_axis.size(), 50u);
    EXPECT_DOUBLE_EQ(s.binder_axis.front(), 4.0);
    EXPECT_DOUBLE_EQ(s.binder_axis.back(), 6.0);
    EXPECT_DOUBLE_EQ(s.voids_axis.front(), 1.0);
    EXPECT_DOUBLE_EQ(s.voids_axis.back(), 9.0);
    for (std::size_t i = 1; i < 50; ++i) {
        EXPECT_LT(s.binder_axis[i - 1], s.binder_axis[i]);
        EXPECT_LT(s.voids_axis[i - 1], s.voids_axis[i]);
    }
    EXPECT_EQ(s.predictions.rows, 50u);
    EXPECT_EQ(s.predictions.cols, 50u);
    EXPECT_EQ(s.coverage.size(), 2500u);
    EXPECT_DOUBLE_EQ(s.strain_level, 400.0);
    ASSERT_EQ(s.data_points.size(), 1u);
}

TEST(PartialDependence, ZeroNetworkPredictsZeroEverywhere) {
    const ModelFile m = surface_model(0.0, 0.0, 0.0, 0.0);
    const PdpSurface s = partial_dependence(m, 500.0, 7, 2.0);
    for (double v : s.predictions.data) {
        EXPECT_DOUBLE_EQ(v, 0.0);
    }
}

TEST(PartialDependence, CellsMatchDirectPredictions) {
    NetworkConfig nc;
    nc.n_inputs = 3;
    nc.n_hidden_layers = 1;
    nc.neurons_per_hidden = 8;
    nc.hidden_activation = Activation::kReLU;
    nc.seed = 123;
    ModelFile m = surface_model(0, 0, 0, 0);
    m.network = init_network(nc);
    m.config = nc;
    const PdpSurface s = partial_dependence(m, 300.0, 5, 2.0);
    for (std::size_t bi = 0; bi < 5; ++bi) {
        for (std::size_t vi = 0; vi < 5; ++vi) {
            const auto direct =
                predict(m, {{s.binder_axis[bi], s.voids_axis[vi], 300.0}});
            EXPECT_DOUBLE_EQ(s.predictions.at(bi, vi), direct[0].value);
        }
    }
}

TEST(PartialDependence, ResolutionOneIsTheRangeOrigin) {
    const ModelFile m = surface_model(1.0, 1.0, 0.0, 0.0);
    const PdpSurface s = partial_dependence(m, 400.0, 1, 2.0);
    ASSERT_EQ(s.binder_axis.size(), 1u);
    EXPECT_DOUBLE_EQ(s.binder_axis[0], 4.0);
    EXPECT_DOUBLE_EQ(s.voids_axis[0], 1.0);
    EXPECT_EQ(s.predictions.data.size(), 1u);
}

TEST(PartialDependence, RefusesStrainOutsideTrainingRange) {
    const ModelFile m = surface_model(1.0, 0.0, 0.0, 0.0);
    try {
        partial_dependence(m, 99.0, 5, 1.0);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "strain extrapolation refused");
    }
    EXPECT_THROW(partial_dependence(m, 901.0, 5, 1.0), DataError);
    // the range ends themselves are fine
    EXPECT_NO_THROW(partial_dependence(m, 100.0, 3, 1.0));
    EXPECT_NO_THROW(partial_dependence(m, 900.0, 3, 1.0));
}

TEST(PartialDependence, RejectsBadGridParameters) {
    const ModelFile m = surface_model(1.0, 0.0, 0.0, 0.0);
    EXPECT_THROW(partial_dependence(m, 400.0, 0, 1.0), ConfigError);
    EXPECT_THROW(partial_dependence(m, 400.0, 5, 0.0), ConfigError);
}

// -------------------------------------------------------------- trends

TEST(QualitativeTrends, BinderOnlyModel) {
    // prediction = scaled binder + 0.5, voids ignored, everything covered
    const ModelFile m = surface_model(1.0, 0.0, 0.0, 0.5);
    const PdpSurface s = partial_dependence(m, 400.0, 9, 2.0);
    const TrendSummary t = qualitative_trends(s);
    EXPECT_EQ(t.covered_cells, 81u);
    EXPECT_DOUBLE_EQ(t.spearman_binder, 1.0);
    EXPECT_DOUBLE_EQ(t.spearman_voids, 0.0); // balanced grid: exact zero
    EXPECT_DOUBLE_EQ(t.argmax[0], 6.0);
    EXPECT_DOUBLE_EQ(t.argmax[1], 1.0); // first voids cell wins the tie
    EXPECT_DOUBLE_EQ(t.argmax[2], 1.5);
    EXPECT_DOUBLE_EQ(t.argmin[0], 4.0);
    EXPECT_DOUBLE_EQ(t.argmin[2], 0.5);
}

TEST(QualitativeTrends, ConstantSurfaceHasZeroTrend) {
    const ModelFile m = surface_model(0.0, 0.0, 0.0, 3.0);
    const PdpSurface s = partial_dependence(m, 400.0, 5, 2.0);
    const TrendSummary t = qualitative_trends(s);
    EXPECT_DOUBLE_EQ(t.spearman_binder, 0.0);
    EXPECT_DOUBLE_EQ(t.spearman_voids, 0.0);
}

TEST(QualitativeTrends, TooFewCoveredCellsThrow) {
    // the lone data point sits on the center cell; a tiny radius covers
    // nothing else
    const ModelFile m = surface_model(1.0, 0.0, 0.0, 0.0);
    const PdpSurface s = partial_dependence(m, 400.0, 3, 0.05);
    std::size_t covered = 0;
    for (auto c : s.coverage) {
        covered += c;
    }
    ASSERT_LT(covered, 3u);
    try {
        qualitative_trends(s);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "trend undefined");
    }
}

// ----------------------------------------------------------- serialization

TEST(SurfaceCsv, LongFormatBinderMajor) {
    const ModelFile m = surface_model(1.0, 0.0, 0.0, 0.5);
    const PdpSurface s = partial_dependence(m, 400.0, 3, 2.0);
    const std::string csv = surface_to_csv(s);
    EXPECT_EQ(csv.rfind("binder,voids,pred_nf,covered\n", 0), 0u);
    const std::size_t rows =
        static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    EXPECT_EQ(rows, 1u + 9u);
    // binder-major: the first three data rows share binder_axis[0] = 4
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line); // header
    for (int i = 0; i < 3; ++i) {
        std::getline(in, line);
        EXPECT_EQ(line.rfind("4,", 0), 0u) << line;
        EXPECT_EQ(line.back(), '1'); // radius 2 covers the whole unit square
    }
}

TEST(DataPointsCsv, EchoesTrainingPoints) {
    ModelFile m = surface_model(1.0, 0.0, 0.0, 0.0);
    m.provenance.training_points = {{5.25, 4.5}, {4.0, 9.0}};
    const PdpSurface s = partial_dependence(m, 400.0, 2, 2.0);
    EXPECT_EQ(data_points_csv(s), "binder,voids\n5.25,4.5\n4,9\n");
}

TEST(SurfaceSidecar, CarriesTrendBlockAndEchoesParameters) {
    const ModelFile m = surface_model(1.0, 0.0, 0.0, 0.5);
    const PdpSurface s = partial_dependence(m, 400.0, 5, 2.0);
    const std::string j = surface_sidecar_json(s, "abc123", 2.0, 5);
    EXPECT_NE(j.find("\"model_hash\": \"abc123\""), std::string::npos);
    EXPECT_NE(j.find("\"strain_level\": 400.0"), std::string::npos);
    EXPECT_NE(j.find("\"resolution\": 5"), std::string::npos);
    EXPECT_NE(j.find("\"spearman_binder\""), std::string::npos);

    // with an uncovered surface the trend block is null, not fabricated
    const PdpSurface bare = partial_dependence(m, 400.0, 3, 0.05);
    const std::string j2 = surface_sidecar_json(bare, "abc123", 0.05, 3);
    EXPECT_NE(j2.find("\"trends\": null"), std::string::npos);
}

} // namespace
} // namespace fatigue

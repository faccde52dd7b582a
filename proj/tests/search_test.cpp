#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fatigue/errors.hpp"
#include "fatigue/rng.hpp"
#include "fatigue/search.hpp"

namespace fatigue {
namespace {

TEST(StudyGrid, Has360Configurations) {
    const GridSpec spec = GridSpec::study_grid();
    const auto entries = enumerate_grid(spec);
    EXPECT_EQ(entries.size(), 360u);

    std::set<std::string> hashes;
    for (const auto& e : entries) {
        hashes.insert(config_hash(e));
    }
    EXPECT_EQ(hashes.size(), 360u); // all distinct
}

TEST(StudyGrid, EnumerationOrderIsLexicographic) {
    const auto entries = enumerate_grid(GridSpec::study_grid());
    // first entry: mse, adam, relu, 1 hidden layer, 10 neurons
    EXPECT_EQ(entries[0].train.loss, LossKind::kMSE);
    EXPECT_EQ(entries[0].train.optimizer.kind, OptimizerKind::kAdam);
    EXPECT_EQ(entries[0].net.hidden_activation, Activation::kReLU);
    EXPECT_EQ(entries[0].net.n_hidden_layers, 1u);
    EXPECT_EQ(entries[0].net.neurons_per_hidden, 10u);
    // neurons is the innermost axis
    EXPECT_EQ(entries[1].net.neurons_per_hidden, 50u);
    EXPECT_EQ(entries[4].net.neurons_per_hidden, 200u);
    // then hidden layers
    EXPECT_EQ(entries[5].net.n_hidden_layers, 2u);
    EXPECT_EQ(entries[5].net.neurons_per_hidden, 10u);
    // loss is the outermost axis: second half is all msle
    EXPECT_EQ(entries[179].train.loss, LossKind::kMSE);
    EXPECT_EQ(entries[180].train.loss, LossKind::kMSLE);
    // every entry keeps a linear output and three inputs
    for (const auto& e : entries) {
        EXPECT_EQ(e.net.output_activation, Activation::kLinear);
        EXPECT_EQ(e.net.n_inputs, 3u);
    }
}

TEST(StudyGrid, ContainsTheReferenceConfigurationOnce) {
    const auto entries = enumerate_grid(GridSpec::study_grid());
    std::size_t found = 0;
    for (const auto& e : entries) {
        if (e.train.loss == LossKind::kMSLE &&
            e.train.optimizer.kind == OptimizerKind::kRMSprop &&
            e.net.hidden_activation == Activation::kReLU &&
            e.net.n_hidden_layers == 2 && e.net.neurons_per_hidden == 200) {
            found += 1;
        }
    }
    EXPECT_EQ(found, 1u);
}

GridSpec tiny_spec() {
    GridSpec spec;
    spec.losses = {LossKind::kMSE};
    spec.optimizers = {OptimizerKind::kAdam};
    spec.activations = {Activation::kLinear};
    spec.hidden_layers = {1};
    spec.neurons = {4};
    spec.epochs = 300;
    spec.folds = 3;
    spec.seed = 11;
    spec.batch_size = 64;
    spec.rates.learning_rate = 0.01;
    return spec;
}

TEST(GridSpecValidation, RejectsEmptyAxes) {
    GridSpec spec = tiny_spec();
    spec.losses.clear();
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = tiny_spec();
    spec.neurons = {0};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = tiny_spec();
    spec.folds = 1;
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(ConfigHash, StableAndSensitiveToEveryAxis) {
    const auto base_entries = enumerate_grid(tiny_spec());
    ASSERT_EQ(base_entries.size(), 1u);
    const GridEntry base = base_entries[0];
    const std::string h = config_hash(base);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
    EXPECT_EQ(config_hash(base), h);

    GridEntry e = base;
    e.train.loss = LossKind::kMSLE;
    EXPECT_NE(config_hash(e), h);
    e = base;
    e.train.optimizer.kind = OptimizerKind::kNadam;
    EXPECT_NE(config_hash(e), h);
    e = base;
    e.net.hidden_activation = Activation::kSigmoid;
    EXPECT_NE(config_hash(e), h);
    e = base;
    e.net.n_hidden_layers = 2;
    EXPECT_NE(config_hash(e), h);
    e = base;
    e.net.neurons_per_hidden = 5;
    EXPECT_NE(config_hash(e), h);
    e = base;
    e.train.epochs = 301; // budget is part of the identity
    EXPECT_NE(config_hash(e), h);
    e = base;
    e.train.optimizer.learning_rate = 0.02;
    EXPECT_NE(config_hash(e), h);
    e = base;
    e.train.batch_size = 16;
    EXPECT_NE(config_hash(e), h);
}

TEST(ParameterCount, HandValues) {
    NetworkConfig cfg;
    cfg.n_inputs = 3;
    cfg.n_hidden_layers = 2;
    cfg.neurons_per_hidden = 200;
    // 3*200+200 + 200*200+200 + 200*1+1
    EXPECT_EQ(parameter_count(cfg), 41201u);
    cfg.n_hidden_layers = 1;
    cfg.neurons_per_hidden = 10;
    EXPECT_EQ(parameter_count(cfg), 51u);
}

TEST(GridRecordJson, RoundTripsIncludingNulls) {
    GridRecord r;
    r.hash = "0123456789abcdef";
    r.entry = enumerate_grid(tiny_spec())[0];
    r.fold_r2 = {0.5, std::nullopt, 0.75};
    r.fold_converged = {true, false, true};
    r.mean_r2 = 0.625;
    r.n_converged = 2;
    r.seed = 987;
    r.epochs_used = 300;
    r.wall_s = 1.25;
    const std::string line = grid_record_to_json(r);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const GridRecord back = grid_record_from_json(line);
    EXPECT_EQ(grid_record_to_json(back), line);
    EXPECT_EQ(back.hash, r.hash);
    ASSERT_EQ(back.fold_r2.size(), 3u);
    EXPECT_FALSE(back.fold_r2[1].has_value());
    EXPECT_DOUBLE_EQ(*back.fold_r2[2], 0.75);
    EXPECT_EQ(back.fold_converged, r.fold_converged);
    EXPECT_EQ(back.n_converged, 2u);

    GridRecord none = r;
    none.mean_r2 = std::nullopt;
    none.fold_r2 = {std::nullopt, std::nullopt, std::nullopt};
    const GridRecord none_back = grid_record_from_json(grid_record_to_json(none));
    EXPECT_FALSE(none_back.mean_r2.has_value());
}

// ------------------------------------------------------------- run_grid

Sample grid_sample(double binder, double voids, double strain) {
    Sample s;
    s.binder_content = binder;
    s.air_voids = voids;
    s.strain = strain;
    s.temperature_c = 20.0;
    s.frequency_hz = 10.0;
    s.fatigue_life = 0.5 + 0.1 * binder + 0.01 * voids + 0.0005 * strain;
    s.source_id = "synthetic";
    return s;
}

std::vector<Sample> grid_samples(std::size_t n) {
    Rng rng(77);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(grid_sample(rng.uniform(4.0, 7.0), rng.uniform(1.0, 10.0),
                                  rng.uniform(100.0, 900.0)));
    }
    return out;
}

std::string temp_store(const std::string& name) {
    const std::string path = ::testing::TempDir() + name;
    std::remove(path.c_str());
    return path;
}

TEST(RunGrid, ComputesRecordsInEnumerationOrder) {
    GridSpec spec = tiny_spec();
    spec.neurons = {4, 6};
    const auto samples = grid_samples(18);
    const std::string store = temp_store("grid_basic.jsonl");
    const GridResult result = run_grid(samples, spec, store, 1);

    const auto entries = enumerate_grid(spec);
    ASSERT_EQ(result.records.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(result.records[i].hash, config_hash(entries[i]));
        EXPECT_FALSE(result.records[i].from_store);
        EXPECT_EQ(result.records[i].epochs_used, 300u);
        EXPECT_EQ(result.records[i].fold_converged.size(), 3u);
        EXPECT_GE(result.records[i].wall_s, 0.0);
    }
    // both converge on this easy target; ranking covers both records
    ASSERT_EQ(result.ranking.size(), 2u);
    const auto& best = result.records[result.ranking[0]];
    const auto& second = result.records[result.ranking[1]];
    ASSERT_TRUE(best.mean_r2.has_value());
    ASSERT_TRUE(second.mean_r2.has_value());
    EXPECT_GE(*best.mean_r2, *second.mean_r2);
}

TEST(RunGrid, ResumesFromTheStoreWithoutRecomputing) {
    GridSpec spec = tiny_spec();
    spec.neurons = {4, 6};
    const auto samples = grid_samples(18);
    const std::string store = temp_store("grid_resume.jsonl");
    const GridResult first = run_grid(samples, spec, store, 1);
    const GridResult second = run_grid(samples, spec, store, 1);

    ASSERT_EQ(second.records.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_TRUE(second.records[i].from_store);
        EXPECT_EQ(second.records[i].hash, first.records[i].hash);
        ASSERT_EQ(second.records[i].fold_r2.size(), first.records[i].fold_r2.size());
        EXPECT_EQ(second.records[i].mean_r2.has_value(),
                  first.records[i].mean_r2.has_value());
        if (first.records[i].mean_r2) {
            EXPECT_DOUBLE_EQ(*second.records[i].mean_r2, *first.records[i].mean_r2);
        }
    }
    EXPECT_EQ(second.ranking, first.ranking);
}

TEST(RunGrid, SkipsTornTrailingLineAndRecomputesIt) {
    GridSpec spec = tiny_spec();
    spec.neurons = {4, 6};
    const auto samples = grid_samples(18);
    const std::string store = temp_store("grid_torn.jsonl");
    const GridResult first = run_grid(samples, spec, store, 1);

    // truncate the file halfway into the second line, as a crash would
    std::ifstream in(store);
    std::string line1;
    std::getline(in, line1);
    std::string line2;
    std::getline(in, line2);
    in.close();
    std::ofstream out(store, std::ios::trunc);
    out << line1 << '\n' << line2.substr(0, line2.size() / 2);
    out.close();

    const GridResult again = run_grid(samples, spec, store, 1);
    EXPECT_TRUE(again.records[0].from_store);
    EXPECT_FALSE(again.records[1].from_store); // torn line was discarded
    if (first.records[1].mean_r2 && again.records[1].mean_r2) {
        EXPECT_DOUBLE_EQ(*again.records[1].mean_r2, *first.records[1].mean_r2);
    }
}

TEST(RunGrid, WorkerCountDoesNotChangeResults) {
    GridSpec spec = tiny_spec();
    spec.neurons = {4, 6};
    spec.epochs = 150;
    const auto samples = grid_samples(18);
    const GridResult serial =
        run_grid(samples, spec, temp_store("grid_serial.jsonl"), 1);
    const GridResult threaded =
        run_grid(samples, spec, temp_store("grid_threaded.jsonl"), 2);
    ASSERT_EQ(serial.records.size(), threaded.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        EXPECT_EQ(serial.records[i].hash, threaded.records[i].hash);
        ASSERT_EQ(serial.records[i].mean_r2.has_value(),
                  threaded.records[i].mean_r2.has_value());
        if (serial.records[i].mean_r2) {
            EXPECT_DOUBLE_EQ(*serial.records[i].mean_r2, *threaded.records[i].mean_r2);
        }
    }
    EXPECT_EQ(serial.ranking, threaded.ranking);
}

TEST(RunGrid, DivergentConfigurationsAreListedButUnranked) {
    GridSpec spec = tiny_spec();
    spec.rates.learning_rate = 1e160; // guarantees numeric overflow
    const auto samples = grid_samples(18);
    const GridResult result =
        run_grid(samples, spec, temp_store("grid_divergent.jsonl"), 1);
    ASSERT_EQ(result.records.size(), 1u);
    EXPECT_EQ(result.records[0].n_converged, 0u);
    EXPECT_FALSE(result.records[0].mean_r2.has_value());
    EXPECT_TRUE(result.ranking.empty());
}

TEST(RunGrid, DuplicateConfigurationsTieBreakByEnumerationOrder) {
    GridSpec spec = tiny_spec();
    spec.neurons = {4, 4};
    const auto samples = grid_samples(18);
    const GridResult result =
        run_grid(samples, spec, temp_store("grid_dup.jsonl"), 1);
    ASSERT_EQ(result.records.size(), 2u);
    EXPECT_EQ(result.records[0].hash, result.records[1].hash);
    if (result.ranking.size() == 2) {
        EXPECT_EQ(result.ranking[0], 0u);
        EXPECT_EQ(result.ranking[1], 1u);
    }
}

// ---------------------------------------------------------------- slices

GridResult two_point_grid() {
    GridSpec spec = tiny_spec();
    spec.neurons = {4, 6};
    return run_grid(grid_samples(18), spec, temp_store("grid_slice.jsonl"), 1);
}

TEST(SliceReport, VariesOneAxisAtTheFixedPoint) {
    const GridResult result = two_point_grid();
    const std::map<std::string, std::string> fixed{{"loss", "mse"},
                                                   {"optimizer", "adam"},
                                                   {"activation", "linear"},
                                                   {"n_hidden", "1"}};
    const auto rows = slice_report(result, "neurons", fixed);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].axis_value, "4");
    EXPECT_EQ(rows[1].axis_value, "6");
    EXPECT_EQ(rows[0].mean_r2.has_value(), result.records[0].mean_r2.has_value());
    if (rows[0].mean_r2) {
        EXPECT_DOUBLE_EQ(*rows[0].mean_r2, *result.records[0].mean_r2);
    }

    const std::string csv = slice_to_csv(rows);
    EXPECT_EQ(csv.rfind("axis_value,mean_r2,n_converged\n", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')),
              3u);
}

TEST(SliceReport, SingletonAxisGivesOneRow) {
    const GridResult result = two_point_grid();
    const std::map<std::string, std::string> fixed{{"loss", "mse"},
                                                   {"optimizer", "adam"},
                                                   {"activation", "linear"},
                                                   {"neurons", "4"}};
    const auto rows = slice_report(result, "n_hidden", fixed);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].axis_value, "1");
}

TEST(SliceReport, RejectsMalformedRequests) {
    const GridResult result = two_point_grid();
    const std::map<std::string, std::string> fixed{{"loss", "mse"},
                                                   {"optimizer", "adam"},
                                                   {"activation", "linear"},
                                                   {"n_hidden", "1"}};
    try {
        slice_report(result, "flavor", fixed);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "unknown grid axis: flavor");
    }

    auto both = fixed;
    both["neurons"] = "4";
    try {
        slice_report(result, "neurons", both);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "axis neurons cannot be both varied and fixed");
    }

    auto missing = fixed;
    missing.erase("optimizer");
    try {
        slice_report(result, "neurons", missing);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "axis optimizer must be fixed for the slice");
    }

    auto absent = fixed;
    absent["optimizer"] = "nadam"; // valid name, not in this grid
    try {
        slice_report(result, "neurons", absent);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "requested fixed point not in the grid");
    }
}

} // namespace
} // namespace fatigue

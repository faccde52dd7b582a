#include "fatigue/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fatigue/errors.hpp"
#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"
#include "fatigue/version.hpp"

namespace fatigue {

using nlohmann::json;

namespace {

// Seed streams: keep network initialization and batch shuffling independent.
constexpr std::uint64_t kStreamNetInit = 1;
constexpr std::uint64_t kStreamShuffle = 2;

std::vector<std::array<double, 3>> raw_inputs(const std::vector<Sample>& samples) {
    std::vector<std::array<double, 3>> rows;
    rows.reserve(samples.size());
    for (const Sample& s : samples) {
        rows.push_back({s.binder_content, s.air_voids, s.strain});
    }
    return rows;
}

std::optional<double> safe_r2(const std::vector<double>& y_true,
                              const std::vector<double>& y_pred) {
    if (y_true.size() < 2) {
        return std::nullopt;
    }
    try {
        return r_squared(y_true, y_pred);
    } catch (const DataError&) {
        return std::nullopt; // no target variance in this fold
    }
}

struct FoldOutcome {
    FoldResult result;
    ModelFile model;
    std::optional<double> full_dataset_r2;
};

FoldOutcome run_fold(const std::vector<Sample>& samples, const FoldAssignment& folds,
                     std::size_t fold, const NetworkConfig& net_cfg,
                     const TrainConfig& train_cfg, const CvOptions& options) {
    std::vector<Sample> train_set;
    std::vector<Sample> test_set;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (folds.assignment[i] == fold ? test_set : train_set).push_back(samples[i]);
    }

    const ScalerParams scaler = fit_scaler(train_set);
    const Matrix X_train = transform(train_set, scaler);
    const Matrix X_test = transform(test_set, scaler);
    const std::vector<double> y_train = fatigue_lives(train_set);
    const std::vector<double> y_test = fatigue_lives(test_set);

    NetworkConfig nc = net_cfg;
    nc.seed = derive_seed(options.seed, kStreamNetInit, fold);
    TrainConfig tc = train_cfg;
    tc.seed = derive_seed(options.seed, kStreamShuffle, fold);

    const Network initial = init_network(nc);
    TrainResult trained = train(initial, X_train, y_train, X_test, y_test, tc);

    FoldOutcome out;
    out.model.config = nc;
    out.model.network = std::move(trained.best);
    out.model.scaler = scaler;
    out.model.provenance.tool_version =
        std::string(kToolName) + " " + kToolVersion;
    out.model.provenance.seed = options.seed;
    out.model.provenance.dataset_hash = options.dataset_hash;
    out.model.provenance.train_config = tc;
    out.model.provenance.best_epoch = trained.history.best_epoch;
    out.model.provenance.converged = trained.converged;
    double strain_min = train_set[0].strain;
    double strain_max = train_set[0].strain;
    for (const Sample& s : train_set) {
        out.model.provenance.training_points.push_back(
            {s.binder_content, s.air_voids});
        strain_min = std::min(strain_min, s.strain);
        strain_max = std::max(strain_max, s.strain);
    }
    out.model.provenance.strain_range = {strain_min, strain_max};

    FoldResult& fr = out.result;
    fr.fold_index = fold;
    fr.converged = trained.converged;
    fr.best_epoch = trained.history.best_epoch;

    // Held-out predictions go through the same path as the predict command.
    const auto preds = predict(out.model, raw_inputs(test_set));
    std::vector<double> y_pred;
    y_pred.reserve(preds.size());
    for (const PredictionRow& p : preds) {
        y_pred.push_back(p.value);
    }
    fr.pairs.reserve(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        fr.pairs.emplace_back(y_test[i], y_pred[i]);
    }
    if (trained.converged) {
        fr.r2 = safe_r2(y_test, y_pred);
        if (options.compute_in_sample) {
            const auto all_preds = predict(out.model, raw_inputs(samples));
            std::vector<double> y_all_pred;
            y_all_pred.reserve(all_preds.size());
            for (const PredictionRow& p : all_preds) {
                y_all_pred.push_back(p.value);
            }
            out.full_dataset_r2 = safe_r2(fatigue_lives(samples), y_all_pred);
        }
    }
    return out;
}

} // namespace

double r_squared(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw std::invalid_argument("r_squared: length mismatch or empty input");
    }
    const double n = static_cast<double>(y_true.size());
    double mean = 0.0;
    for (double v : y_true) {
        mean += v;
    }
    mean /= n;
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double dt = y_true[i] - mean;
        const double dr = y_true[i] - y_pred[i];
        ss_tot += dt * dt;
        ss_res += dr * dr;
    }
    if (ss_tot == 0.0) {
        throw DataError("degenerate target variance");
    }
    return 1.0 - ss_res / ss_tot;
}

CvReport cross_validate(const std::vector<Sample>& samples,
                        const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
                        const CvOptions& options,
                        std::vector<ModelFile>* fold_models) {
    if (samples.empty()) {
        throw DataError("empty dataset");
    }
    const FoldAssignment folds =
        kfold_split(samples.size(), options.n_folds, options.seed);

    std::vector<FoldOutcome> outcomes(options.n_folds);
    const std::size_t workers =
        std::max<std::size_t>(1, std::min(options.workers, options.n_folds));
    if (workers == 1) {
        for (std::size_t f = 0; f < options.n_folds; ++f) {
            outcomes[f] = run_fold(samples, folds, f, net_cfg, train_cfg, options);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(options.n_folds);
        auto worker = [&]() {
            for (;;) {
                const std::size_t f = next.fetch_add(1);
                if (f >= options.n_folds) {
                    return;
                }
                try {
                    outcomes[f] =
                        run_fold(samples, folds, f, net_cfg, train_cfg, options);
                } catch (...) {
                    errors[f] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
        for (const auto& err : errors) {
            if (err) {
                std::rethrow_exception(err); // first fold's failure, by index
            }
        }
    }

    CvReport report;
    report.n_folds = options.n_folds;
    report.seed = options.seed;
    double r2_sum = 0.0;
    std::size_t r2_count = 0;
    double in_sample_sum = 0.0;
    std::size_t in_sample_count = 0;
    std::vector<double> pooled_true;
    std::vector<double> pooled_pred;
    for (std::size_t f = 0; f < options.n_folds; ++f) {
        FoldOutcome& o = outcomes[f];
        if (o.result.converged) {
            report.n_converged += 1;
            for (const auto& [t, p] : o.result.pairs) {
                pooled_true.push_back(t);
                pooled_pred.push_back(p);
            }
            if (o.result.r2) {
                r2_sum += *o.result.r2;
                r2_count += 1;
            }
            if (o.full_dataset_r2) {
                in_sample_sum += *o.full_dataset_r2;
                in_sample_count += 1;
            }
        }
        if (fold_models) {
            fold_models->push_back(std::move(o.model));
        }
        report.folds.push_back(std::move(o.result));
    }
    if (r2_count > 0) {
        report.mean_r2 = r2_sum / static_cast<double>(r2_count);
    }
    if (in_sample_count > 0) {
        report.in_sample_r2 = in_sample_sum / static_cast<double>(in_sample_count);
    }
    if (pooled_true.size() >= 2) {
        report.pooled_r2 = safe_r2(pooled_true, pooled_pred);
    }
    return report;
}

std::vector<PredictionRow> predict(const ModelFile& model,
                                   const std::vector<std::array<double, 3>>& inputs) {
    model.network.check();
    if (model.network.n_inputs() != 3 || model.network.n_outputs() != 1) {
        throw ConfigError("model arity mismatch: expected 3 inputs and 1 output");
    }
    std::vector<PredictionRow> out(inputs.size());
    if (inputs.empty()) {
        return out;
    }
    Matrix X(inputs.size(), 3);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (double v : inputs[i]) {
            if (!std::isfinite(v)) {
                throw DataError("non-finite input at row " + std::to_string(i + 1));
            }
        }
        const auto scaled =
            transform_one(inputs[i][0], inputs[i][1], inputs[i][2], model.scaler);
        X.at(i, 0) = scaled[0];
        X.at(i, 1) = scaled[1];
        X.at(i, 2) = scaled[2];
    }
    const std::vector<double> raw = forward_batch(model.network, X);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        out[i].value = raw[i] > 0.0 ? raw[i] : 0.0;
        const bool inside =
            inputs[i][0] >= model.scaler.binder.min &&
            inputs[i][0] <= model.scaler.binder.max &&
            inputs[i][1] >= model.scaler.voids.min &&
            inputs[i][1] <= model.scaler.voids.max &&
            inputs[i][2] >= model.scaler.strain.min &&
            inputs[i][2] <= model.scaler.strain.max;
        out[i].extrapolated = !inside;
    }
    return out;
}

std::string cv_report_to_json(const CvReport& report, const std::string& dataset_hash) {
    json folds = json::array();
    for (const FoldResult& f : report.folds) {
        json jf{
            {"fold", f.fold_index},
            {"converged", f.converged},
            {"best_epoch", f.best_epoch},
            {"n_test", f.pairs.size()},
        };
        if (f.r2) {
            jf["r2"] = *f.r2;
        } else {
            jf["r2"] = nullptr;
        }
        folds.push_back(std::move(jf));
    }
    json j{
        {"n_folds", report.n_folds},
        {"seed", report.seed},
        {"dataset_hash", dataset_hash},
        {"n_converged", report.n_converged},
        {"no_converged_folds", report.n_converged == 0},
        {"folds", folds},
    };
    j["mean_r2"] = report.mean_r2 ? json(*report.mean_r2) : json(nullptr);
    j["pooled_r2"] = report.pooled_r2 ? json(*report.pooled_r2) : json(nullptr);
    if (report.in_sample_r2) {
        j["in_sample_r2"] = *report.in_sample_r2;
    }
    return j.dump(2) + "\n";
}

std::string true_vs_pred_csv(const CvReport& report) {
    std::ostringstream out;
    out << "fold,true_nf,pred_nf\n";
    for (const FoldResult& f : report.folds) {
        for (const auto& [t, p] : f.pairs) {
            out << f.fold_index << ',' << format_double(t) << ',' << format_double(p)
                << '\n';
        }
    }
    return out.str();
}

} // namespace fatigue

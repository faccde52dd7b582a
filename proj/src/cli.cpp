#include "fatigue/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fatigue/analysis.hpp"
#include "fatigue/errors.hpp"
#include "fatigue/evaluation.hpp"
#include "fatigue/io_util.hpp"
#include "fatigue/model_io.hpp"
#include "fatigue/rng.hpp"
#include "fatigue/version.hpp"

namespace fatigue::cli {

using nlohmann::json;

namespace {

// Seed streams 1 and 2 are the per-fold network/shuffle streams of
// cross-validation; 4 seeds the train command's hold-out split.
constexpr std::uint64_t kStreamNetInit = 1;
constexpr std::uint64_t kStreamShuffle = 2;
constexpr std::uint64_t kStreamSplit = 4;

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown config key: " +
                              (section.empty() ? key : section + "." + key));
        }
    }
}

std::string quote_csv(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += "\"";
    return out;
}

struct PreparedData {
    std::vector<Sample> retained;
    std::vector<RejectedSample> rejected; // condition screen + both filter stages
    double applied_lower = 0.0;
    double applied_upper = 0.0;
    std::string dataset_hash;
    std::size_t raw_count = 0;
};

// Shared ingest path: load, screen the fixed test conditions, filter
// outliers. Every command that consumes the dataset goes through here, so
// they all see the identical retained set.
PreparedData load_and_filter(const RunConfig& cfg) {
    PreparedData out;
    out.dataset_hash = file_content_hash(cfg.dataset);
    std::vector<Sample> raw;
    try {
        raw = load_csv(cfg.dataset);
    } catch (const DataError& e) {
        throw DataError(cfg.dataset + ": " + e.what());
    }
    out.raw_count = raw.size();
    std::vector<Sample> eligible;
    for (const Sample& s : raw) {
        if (s.matches_fixed_conditions()) {
            eligible.push_back(s);
        } else {
            out.rejected.push_back(
                {s, "test conditions: not 20 C / 21.1 C at 10 Hz"});
        }
    }
    FilterResult filtered = filter_outliers(eligible, cfg.filter);
    out.retained = std::move(filtered.retained);
    for (RejectedSample& r : filtered.rejected) {
        out.rejected.push_back(std::move(r));
    }
    out.applied_lower = filtered.applied_lower;
    out.applied_upper = filtered.applied_upper;
    return out;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return cfg.output_dir + "/" + name;
}

void write_resolved_config(const RunConfig& cfg) {
    write_file(out_path(cfg, "resolved_config.json"), run_config_to_json(cfg));
}

NetworkConfig network_config_with_seed(const RunConfig& cfg, std::uint64_t net_seed) {
    NetworkConfig nc = cfg.network;
    nc.seed = net_seed;
    return nc;
}

ModelFile build_model_file(const RunConfig& cfg, const NetworkConfig& nc,
                           const TrainConfig& tc, Network net, bool converged,
                           std::size_t best_epoch, const std::string& dataset_hash,
                           const std::vector<Sample>& train_set,
                           const ScalerParams& scaler) {
    ModelFile model;
    model.config = nc;
    model.network = std::move(net);
    model.scaler = scaler;
    model.provenance.tool_version = std::string(kToolName) + " " + kToolVersion;
    model.provenance.seed = cfg.seed;
    model.provenance.dataset_hash = dataset_hash;
    model.provenance.train_config = tc;
    model.provenance.best_epoch = best_epoch;
    model.provenance.converged = converged;
    double strain_min = train_set[0].strain;
    double strain_max = train_set[0].strain;
    for (const Sample& s : train_set) {
        model.provenance.training_points.push_back({s.binder_content, s.air_voids});
        strain_min = std::min(strain_min, s.strain);
        strain_max = std::max(strain_max, s.strain);
    }
    model.provenance.strain_range = {strain_min, strain_max};
    return model;
}

GridSpec grid_spec_from_config(const RunConfig& cfg) {
    GridSpec spec;
    spec.losses = cfg.grid.losses;
    spec.optimizers = cfg.grid.optimizers;
    spec.activations = cfg.grid.activations;
    spec.hidden_layers = cfg.grid.hidden_layers;
    spec.neurons = cfg.grid.neurons;
    spec.epochs = cfg.grid.epochs;
    spec.batch_size = cfg.grid.batch_size;
    spec.folds = cfg.cv_folds;
    spec.seed = cfg.seed;
    spec.divergence_patience = cfg.train.cfg.divergence_patience;
    spec.rates = cfg.train.cfg.optimizer;
    return spec;
}

std::string strain_label(double strain) {
    std::string s = format_double(strain);
    for (char& c : s) {
        if (c == '.' || c == '+' || c == '-') {
            c = '_';
        }
    }
    return s;
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    return run_config_from_json_text(read_file(path));
}

RunConfig run_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    RunConfig cfg;
    // tool_version appears in configs echoed by config_to_json; it is
    // provenance, not configuration, so it parses but carries nothing.
    check_keys(j, "",
               {"dataset", "seed", "workers", "output_dir", "filter", "network",
                "train", "cv", "grid", "pdp", "tool_version"});
    if (j.contains("dataset")) {
        cfg.dataset = j.at("dataset").get<std::string>();
    }
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("workers")) {
        cfg.workers = j.at("workers").get<std::size_t>();
        if (cfg.workers == 0) {
            throw ConfigError("workers must be at least 1");
        }
    }
    if (j.contains("output_dir")) {
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("filter")) {
        const json& f = j.at("filter");
        check_keys(f, "filter",
                   {"nf_lower_bound", "nf_upper_bound", "z_threshold",
                    "percentile_bounds", "lower_percentile", "upper_percentile"});
        if (f.contains("nf_lower_bound")) {
            cfg.filter.nf_lower_bound = f.at("nf_lower_bound").get<double>();
        }
        if (f.contains("nf_upper_bound")) {
            cfg.filter.nf_upper_bound = f.at("nf_upper_bound").get<double>();
        }
        if (f.contains("z_threshold")) {
            cfg.filter.z_threshold = f.at("z_threshold").get<double>();
        }
        if (f.contains("percentile_bounds")) {
            cfg.filter.percentile_bounds = f.at("percentile_bounds").get<bool>();
        }
        if (f.contains("lower_percentile")) {
            cfg.filter.lower_percentile = f.at("lower_percentile").get<double>();
        }
        if (f.contains("upper_percentile")) {
            cfg.filter.upper_percentile = f.at("upper_percentile").get<double>();
        }
        cfg.filter.validate();
    }
    if (j.contains("network")) {
        const json& n = j.at("network");
        check_keys(n, "network",
                   {"n_hidden_layers", "neurons_per_hidden", "hidden_activation",
                    "output_activation"});
        if (n.contains("n_hidden_layers")) {
            cfg.network.n_hidden_layers = n.at("n_hidden_layers").get<std::size_t>();
        }
        if (n.contains("neurons_per_hidden")) {
            cfg.network.neurons_per_hidden =
                n.at("neurons_per_hidden").get<std::size_t>();
        }
        if (n.contains("hidden_activation")) {
            cfg.network.hidden_activation =
                activation_from_string(n.at("hidden_activation").get<std::string>());
        }
        if (n.contains("output_activation")) {
            cfg.network.output_activation =
                activation_from_string(n.at("output_activation").get<std::string>());
        }
        cfg.network.validate();
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t, "train",
                   {"loss", "optimizer", "learning_rate", "beta1", "beta2", "rho",
                    "epsilon", "epochs", "batch_size", "checkpoint_metric",
                    "divergence_patience", "validation_fraction", "validation_fold"});
        if (t.contains("loss")) {
            cfg.train.cfg.loss = loss_from_string(t.at("loss").get<std::string>());
        }
        if (t.contains("optimizer")) {
            cfg.train.cfg.optimizer.kind =
                optimizer_from_string(t.at("optimizer").get<std::string>());
        }
        if (t.contains("learning_rate")) {
            cfg.train.cfg.optimizer.learning_rate =
                t.at("learning_rate").get<double>();
        }
        if (t.contains("beta1")) {
            cfg.train.cfg.optimizer.beta1 = t.at("beta1").get<double>();
        }
        if (t.contains("beta2")) {
            cfg.train.cfg.optimizer.beta2 = t.at("beta2").get<double>();
        }
        if (t.contains("rho")) {
            cfg.train.cfg.optimizer.rho = t.at("rho").get<double>();
        }
        if (t.contains("epsilon")) {
            cfg.train.cfg.optimizer.epsilon = t.at("epsilon").get<double>();
        }
        if (t.contains("epochs")) {
            cfg.train.cfg.epochs = t.at("epochs").get<std::size_t>();
        }
        if (t.contains("batch_size")) {
            cfg.train.cfg.batch_size = t.at("batch_size").get<std::size_t>();
        }
        if (t.contains("checkpoint_metric")) {
            const std::string metric = t.at("checkpoint_metric").get<std::string>();
            if (metric == "validation_loss") {
                cfg.train.cfg.checkpoint_metric = CheckpointMetric::kValidationLoss;
            } else if (metric == "training_loss") {
                cfg.train.cfg.checkpoint_metric = CheckpointMetric::kTrainingLoss;
            } else {
                throw ConfigError("unknown checkpoint_metric: " + metric);
            }
        }
        if (t.contains("divergence_patience")) {
            cfg.train.cfg.divergence_patience =
                t.at("divergence_patience").get<std::size_t>();
        }
        if (t.contains("validation_fraction")) {
            cfg.train.validation_fraction = t.at("validation_fraction").get<double>();
            if (!(cfg.train.validation_fraction >= 0.0 &&
                  cfg.train.validation_fraction < 1.0)) {
                throw ConfigError("validation_fraction must lie in [0,1)");
            }
        }
        if (t.contains("validation_fold") && !t.at("validation_fold").is_null()) {
            cfg.train.validation_fold = t.at("validation_fold").get<std::size_t>();
        }
        cfg.train.cfg.validate();
    }
    if (j.contains("cv")) {
        const json& c = j.at("cv");
        check_keys(c, "cv", {"n_folds", "in_sample_r2"});
        if (c.contains("n_folds")) {
            cfg.cv_folds = c.at("n_folds").get<std::size_t>();
            if (cfg.cv_folds < 2) {
                throw ConfigError("cv.n_folds must be at least 2");
            }
        }
        if (c.contains("in_sample_r2")) {
            cfg.cv_in_sample = c.at("in_sample_r2").get<bool>();
        }
    }
    // Grid defaults: the full study grid.
    {
        const GridSpec study = GridSpec::study_grid();
        cfg.grid.losses = study.losses;
        cfg.grid.optimizers = study.optimizers;
        cfg.grid.activations = study.activations;
        cfg.grid.hidden_layers = study.hidden_layers;
        cfg.grid.neurons = study.neurons;
        cfg.grid.epochs = study.epochs;
        cfg.grid.batch_size = study.batch_size;
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, "grid",
                   {"losses", "optimizers", "activations", "hidden_layers", "neurons",
                    "epochs", "batch_size", "slices"});
        if (g.contains("losses")) {
            cfg.grid.losses.clear();
            for (const json& v : g.at("losses")) {
                cfg.grid.losses.push_back(loss_from_string(v.get<std::string>()));
            }
        }
        if (g.contains("optimizers")) {
            cfg.grid.optimizers.clear();
            for (const json& v : g.at("optimizers")) {
                cfg.grid.optimizers.push_back(
                    optimizer_from_string(v.get<std::string>()));
            }
        }
        if (g.contains("activations")) {
            cfg.grid.activations.clear();
            for (const json& v : g.at("activations")) {
                cfg.grid.activations.push_back(
                    activation_from_string(v.get<std::string>()));
            }
        }
        if (g.contains("hidden_layers")) {
            cfg.grid.hidden_layers =
                g.at("hidden_layers").get<std::vector<std::size_t>>();
        }
        if (g.contains("neurons")) {
            cfg.grid.neurons = g.at("neurons").get<std::vector<std::size_t>>();
        }
        if (g.contains("epochs")) {
            cfg.grid.epochs = g.at("epochs").get<std::size_t>();
        }
        if (g.contains("batch_size")) {
            cfg.grid.batch_size = g.at("batch_size").get<std::size_t>();
        }
        if (g.contains("slices")) {
            for (const json& js : g.at("slices")) {
                check_keys(js, "grid.slices", {"vary", "fix"});
                SliceSpec slice;
                slice.vary = js.at("vary").get<std::string>();
                for (const auto& [axis, value] : js.at("fix").items()) {
                    if (value.is_string()) {
                        slice.fix[axis] = value.get<std::string>();
                    } else {
                        slice.fix[axis] = value.dump();
                    }
                }
                cfg.grid.slices.push_back(std::move(slice));
            }
        }
    }
    if (j.contains("pdp")) {
        const json& p = j.at("pdp");
        check_keys(p, "pdp", {"strain_levels", "resolution", "coverage_radius"});
        if (p.contains("strain_levels")) {
            cfg.pdp.strain_levels = p.at("strain_levels").get<std::vector<double>>();
            if (cfg.pdp.strain_levels.empty()) {
                throw ConfigError("pdp.strain_levels must be nonempty");
            }
        }
        if (p.contains("resolution")) {
            cfg.pdp.resolution = p.at("resolution").get<std::size_t>();
            if (cfg.pdp.resolution == 0) {
                throw ConfigError("pdp.resolution must be positive");
            }
        }
        if (p.contains("coverage_radius")) {
            cfg.pdp.coverage_radius = p.at("coverage_radius").get<double>();
            if (!(cfg.pdp.coverage_radius > 0.0)) {
                throw ConfigError("pdp.coverage_radius must be positive");
            }
        }
    }
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    json slices = json::array();
    for (const SliceSpec& s : cfg.grid.slices) {
        slices.push_back(json{{"vary", s.vary}, {"fix", s.fix}});
    }
    auto names = [](const auto& values, auto&& to_name) {
        json arr = json::array();
        for (const auto& v : values) {
            arr.push_back(to_name(v));
        }
        return arr;
    };
    json j{
        {"dataset", cfg.dataset},
        {"seed", cfg.seed},
        {"workers", cfg.workers},
        {"output_dir", cfg.output_dir},
        {"tool_version", std::string(kToolName) + " " + kToolVersion},
        {"filter",
         {{"nf_lower_bound", cfg.filter.nf_lower_bound},
          {"nf_upper_bound", cfg.filter.nf_upper_bound},
          {"z_threshold", cfg.filter.z_threshold},
          {"percentile_bounds", cfg.filter.percentile_bounds},
          {"lower_percentile", cfg.filter.lower_percentile},
          {"upper_percentile", cfg.filter.upper_percentile}}},
        {"network",
         {{"n_hidden_layers", cfg.network.n_hidden_layers},
          {"neurons_per_hidden", cfg.network.neurons_per_hidden},
          {"hidden_activation", to_string(cfg.network.hidden_activation)},
          {"output_activation", to_string(cfg.network.output_activation)}}},
        {"train",
         {{"loss", to_string(cfg.train.cfg.loss)},
          {"optimizer", to_string(cfg.train.cfg.optimizer.kind)},
          {"learning_rate", cfg.train.cfg.optimizer.learning_rate},
          {"beta1", cfg.train.cfg.optimizer.beta1},
          {"beta2", cfg.train.cfg.optimizer.beta2},
          {"rho", cfg.train.cfg.optimizer.rho},
          {"epsilon", cfg.train.cfg.optimizer.epsilon},
          {"epochs", cfg.train.cfg.epochs},
          {"batch_size", cfg.train.cfg.batch_size},
          {"checkpoint_metric",
           cfg.train.cfg.checkpoint_metric == CheckpointMetric::kValidationLoss
               ? "validation_loss"
               : "training_loss"},
          {"divergence_patience", cfg.train.cfg.divergence_patience},
          {"validation_fraction", cfg.train.validation_fraction},
          {"validation_fold", cfg.train.validation_fold
                                  ? json(*cfg.train.validation_fold)
                                  : json(nullptr)}}},
        {"cv", {{"n_folds", cfg.cv_folds}, {"in_sample_r2", cfg.cv_in_sample}}},
        {"grid",
         {{"losses", names(cfg.grid.losses,
                           [](LossKind k) { return to_string(k); })},
          {"optimizers", names(cfg.grid.optimizers,
                               [](OptimizerKind k) { return to_string(k); })},
          {"activations", names(cfg.grid.activations,
                                [](Activation a) { return to_string(a); })},
          {"hidden_layers", cfg.grid.hidden_layers},
          {"neurons", cfg.grid.neurons},
          {"epochs", cfg.grid.epochs},
          {"batch_size", cfg.grid.batch_size},
          {"slices", slices}}},
        {"pdp",
         {{"strain_levels", cfg.pdp.strain_levels},
          {"resolution", cfg.pdp.resolution},
          {"coverage_radius", cfg.pdp.coverage_radius}}},
    };
    return j.dump(2) + "\n";
}

int cmd_prepare(const RunConfig& cfg) {
    const PreparedData data = load_and_filter(cfg);

    write_file(out_path(cfg, "retained.csv"), samples_to_csv(data.retained));

    std::ostringstream rejected;
    rejected << kCsvHeader << ",reason\n";
    std::map<std::string, std::size_t> reason_counts;
    for (const RejectedSample& r : data.rejected) {
        const Sample& s = r.sample;
        rejected << format_double(s.binder_content) << ','
                 << format_double(s.air_voids) << ',' << format_double(s.strain)
                 << ',' << format_double(s.temperature_c) << ','
                 << format_double(s.frequency_hz) << ','
                 << format_double(s.fatigue_life) << ',' << s.source_id << ','
                 << quote_csv(r.reason) << '\n';
        reason_counts[r.reason] += 1;
    }
    write_file(out_path(cfg, "rejected.csv"), rejected.str());

    json summary{
        {"input_rows", data.raw_count},
        {"retained", data.retained.size()},
        {"rejected", data.rejected.size()},
        {"reason_counts", reason_counts},
        {"applied_nf_lower_bound", data.applied_lower},
        {"applied_nf_upper_bound", data.applied_upper},
        {"z_threshold", cfg.filter.z_threshold},
        {"dataset_hash", data.dataset_hash},
        {"seed", cfg.seed},
        {"tool_version", std::string(kToolName) + " " + kToolVersion},
    };
    write_file(out_path(cfg, "summary.json"), summary.dump(2) + "\n");
    write_resolved_config(cfg);
    return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
    const PreparedData data = load_and_filter(cfg);
    const std::vector<Sample>& samples = data.retained;

    std::vector<Sample> train_set;
    std::vector<Sample> val_set;
    std::size_t split_index = 0;
    if (cfg.train.validation_fold) {
        const std::size_t fold = *cfg.train.validation_fold;
        if (fold >= cfg.cv_folds) {
            throw ConfigError("validation_fold out of range");
        }
        const FoldAssignment folds =
            kfold_split(samples.size(), cfg.cv_folds, cfg.seed);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            (folds.assignment[i] == fold ? val_set : train_set).push_back(samples[i]);
        }
        split_index = fold;
    } else {
        std::vector<std::size_t> order(samples.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(cfg.seed, kStreamSplit, 0));
        rng.shuffle(order);
        std::size_t val_count = 0;
        if (cfg.train.validation_fraction > 0.0) {
            val_count = static_cast<std::size_t>(
                cfg.train.validation_fraction * static_cast<double>(samples.size()));
            val_count = std::max<std::size_t>(1, val_count);
        }
        if (val_count >= samples.size()) {
            throw ConfigError("validation split leaves no training data");
        }
        for (std::size_t i = 0; i < samples.size(); ++i) {
            (i < val_count ? val_set : train_set).push_back(samples[order[i]]);
        }
    }
    if (train_set.empty()) {
        throw DataError("training split is empty");
    }

    const ScalerParams scaler = fit_scaler(train_set);
    const Matrix X_train = transform(train_set, scaler);
    const Matrix X_val = transform(val_set, scaler);
    const std::vector<double> y_train = fatigue_lives(train_set);
    const std::vector<double> y_val = fatigue_lives(val_set);

    const NetworkConfig nc = network_config_with_seed(
        cfg, derive_seed(cfg.seed, kStreamNetInit, split_index));
    TrainConfig tc = cfg.train.cfg;
    tc.seed = derive_seed(cfg.seed, kStreamShuffle, split_index);

    const Network initial = init_network(nc);
    TrainResult result = train(initial, X_train, y_train, X_val, y_val, tc);

    const ModelFile model = build_model_file(
        cfg, nc, tc, std::move(result.best), result.converged,
        result.history.best_epoch, data.dataset_hash, train_set, scaler);
    save_model(model, out_path(cfg, "model.json"));
    write_file(out_path(cfg, "history.csv"), history_to_csv(result.history));
    write_resolved_config(cfg);
    if (!result.converged) {
        std::cerr << "training did not converge (see provenance block)\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_cv(const RunConfig& cfg) {
    const PreparedData data = load_and_filter(cfg);
    CvOptions options;
    options.n_folds = cfg.cv_folds;
    options.seed = cfg.seed;
    options.workers = cfg.workers;
    options.compute_in_sample = cfg.cv_in_sample;
    options.dataset_hash = data.dataset_hash;
    const CvReport report =
        cross_validate(data.retained, cfg.network, cfg.train.cfg, options);
    write_file(out_path(cfg, "cv_report.json"),
               cv_report_to_json(report, data.dataset_hash));
    write_file(out_path(cfg, "true_vs_pred.csv"), true_vs_pred_csv(report));
    write_resolved_config(cfg);
    if (report.n_converged == 0) {
        std::cerr << "no converged folds\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_grid(const RunConfig& cfg) {
    const PreparedData data = load_and_filter(cfg);
    const GridSpec spec = grid_spec_from_config(cfg);
    // Write the resolved config first: grid runs are long and resumable.
    write_resolved_config(cfg);
    const std::string store_path = out_path(cfg, "grid_results.jsonl");
    const GridResult result =
        run_grid(data.retained, spec, store_path, cfg.workers, &std::cerr);

    json ranking = json::array();
    for (std::size_t rank = 0; rank < result.ranking.size(); ++rank) {
        const GridRecord& r = result.records[result.ranking[rank]];
        ranking.push_back(json{
            {"rank", rank + 1},
            {"hash", r.hash},
            {"loss", to_string(r.entry.train.loss)},
            {"optimizer", to_string(r.entry.train.optimizer.kind)},
            {"activation", to_string(r.entry.net.hidden_activation)},
            {"n_hidden", r.entry.net.n_hidden_layers},
            {"neurons", r.entry.net.neurons_per_hidden},
            {"mean_r2", *r.mean_r2},
            {"n_converged", r.n_converged},
            {"parameters", parameter_count(r.entry.net)},
        });
    }
    json unranked = json::array();
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        if (!result.records[i].mean_r2) {
            unranked.push_back(result.records[i].hash);
        }
    }
    json out{
        {"seed", cfg.seed},
        {"dataset_hash", data.dataset_hash},
        {"epochs", spec.epochs},
        {"folds", spec.folds},
        {"configurations", result.records.size()},
        {"ranking", ranking},
        {"unranked", unranked},
    };
    write_file(out_path(cfg, "ranking.json"), out.dump(2) + "\n");

    for (std::size_t i = 0; i < cfg.grid.slices.size(); ++i) {
        const SliceSpec& slice = cfg.grid.slices[i];
        const auto rows = slice_report(result, slice.vary, slice.fix);
        write_file(out_path(cfg, "slice_" + std::to_string(i) + "_" + slice.vary +
                                     ".csv"),
                   slice_to_csv(rows));
    }
    return kExitOk;
}

int cmd_pdp(const RunConfig& cfg, const std::string& model_path) {
    const ModelFile model = load_model(model_path);
    const std::string model_hash = file_content_hash(model_path);
    bool wrote_points = false;
    for (double strain : cfg.pdp.strain_levels) {
        const PdpSurface surface = partial_dependence(
            model, strain, cfg.pdp.resolution, cfg.pdp.coverage_radius);
        const std::string label = strain_label(strain);
        write_file(out_path(cfg, "pdp_strain_" + label + ".csv"),
                   surface_to_csv(surface));
        write_file(out_path(cfg, "pdp_strain_" + label + ".json"),
                   surface_sidecar_json(surface, model_hash, cfg.pdp.coverage_radius,
                                        cfg.pdp.resolution));
        if (!wrote_points) {
            write_file(out_path(cfg, "data_points.csv"), data_points_csv(surface));
            wrote_points = true;
        }
    }
    write_resolved_config(cfg);
    return kExitOk;
}

int cmd_predict(const RunConfig& cfg, const std::string& model_path,
                const std::string& input_path) {
    const ModelFile model = load_model(model_path);
    const std::string content = read_file(input_path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty file: " + input_path);
    }
    auto strip = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) {
            s.pop_back();
        }
        return s;
    };
    if (strip(line) != "binder_content,air_voids,strain_microstrain") {
        throw DataError("unexpected CSV header in " + input_path);
    }
    std::vector<std::array<double, 3>> inputs;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (strip(line).empty()) {
            continue;
        }
        row += 1;
        std::istringstream fields(line);
        std::array<double, 3> input{};
        std::string field;
        for (std::size_t c = 0; c < 3; ++c) {
            if (!std::getline(fields, field, ',')) {
                throw DataError("malformed row: expected 3 fields at row " +
                                std::to_string(row) + " in " + input_path);
            }
            try {
                input[c] = std::stod(field);
            } catch (const std::exception&) {
                throw DataError("malformed row: cannot parse field " +
                                std::to_string(c + 1) + " at row " +
                                std::to_string(row) + " in " + input_path);
            }
        }
        inputs.push_back(input);
    }

    const auto predictions = predict(model, inputs);
    std::ostringstream out;
    out << "binder_content,air_voids,strain_microstrain,pred_nf,extrapolated\n";
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        out << format_double(inputs[i][0]) << ',' << format_double(inputs[i][1])
            << ',' << format_double(inputs[i][2]) << ','
            << format_double(predictions[i].value) << ','
            << (predictions[i].extrapolated ? '1' : '0') << '\n';
    }
    write_file(out_path(cfg, "predictions.csv"), out.str());
    write_resolved_config(cfg);
    return kExitOk;
}

} // namespace fatigue::cli

#include "fatigue/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fatigue/errors.hpp"
#include "fatigue/evaluation.hpp"
#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"

namespace fatigue {

using nlohmann::json;

namespace {

constexpr std::uint64_t kStreamGrid = 3;

std::string axis_value_string(const GridEntry& e, const std::string& axis) {
    if (axis == "loss") return to_string(e.train.loss);
    if (axis == "optimizer") return to_string(e.train.optimizer.kind);
    if (axis == "activation") return to_string(e.net.hidden_activation);
    if (axis == "n_hidden") return std::to_string(e.net.n_hidden_layers);
    if (axis == "neurons") return std::to_string(e.net.neurons_per_hidden);
    throw ConfigError("unknown grid axis: " + axis);
}

const std::vector<std::string>& all_axes() {
    static const std::vector<std::string> axes = {"loss", "optimizer", "activation",
                                                  "n_hidden", "neurons"};
    return axes;
}

} // namespace

void GridSpec::validate() const {
    if (losses.empty() || optimizers.empty() || activations.empty() ||
        hidden_layers.empty() || neurons.empty()) {
        throw ConfigError("grid axes must be nonempty");
    }
    if (epochs == 0) {
        throw ConfigError("epochs must be at least 1");
    }
    if (folds < 2) {
        throw ConfigError("folds must be at least 2");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    rates.validate();
    for (std::size_t h : hidden_layers) {
        if (h == 0) {
            throw ConfigError("hidden layer counts must be positive");
        }
    }
    for (std::size_t n : neurons) {
        if (n == 0) {
            throw ConfigError("neuron counts must be positive");
        }
    }
}

GridSpec GridSpec::study_grid() {
    GridSpec spec;
    spec.losses = {LossKind::kMSE, LossKind::kMSLE};
    spec.optimizers = {OptimizerKind::kAdam, OptimizerKind::kNadam,
                       OptimizerKind::kRMSprop};
    spec.activations = {Activation::kReLU, Activation::kLinear, Activation::kSigmoid};
    spec.hidden_layers = {1, 2, 3, 4};
    spec.neurons = {10, 50, 100, 150, 200};
    return spec;
}

std::vector<GridEntry> enumerate_grid(const GridSpec& spec) {
    spec.validate();
    std::vector<GridEntry> entries;
    entries.reserve(spec.losses.size() * spec.optimizers.size() *
                    spec.activations.size() * spec.hidden_layers.size() *
                    spec.neurons.size());
    for (LossKind loss : spec.losses) {
        for (OptimizerKind opt : spec.optimizers) {
            for (Activation act : spec.activations) {
                for (std::size_t nh : spec.hidden_layers) {
                    for (std::size_t nn : spec.neurons) {
                        GridEntry e;
                        e.net.n_inputs = 3;
                        e.net.n_hidden_layers = nh;
                        e.net.neurons_per_hidden = nn;
                        e.net.hidden_activation = act;
                        e.net.output_activation = Activation::kLinear;
                        e.train.loss = loss;
                        e.train.optimizer = spec.rates;
                        e.train.optimizer.kind = opt;
                        e.train.epochs = spec.epochs;
                        e.train.batch_size = spec.batch_size;
                        e.train.checkpoint_metric = CheckpointMetric::kValidationLoss;
                        e.train.divergence_patience = spec.divergence_patience;
                        entries.push_back(std::move(e));
                    }
                }
            }
        }
    }
    return entries;
}

std::string config_hash(const GridEntry& e) {
    std::ostringstream key;
    key << "loss=" << to_string(e.train.loss)
        << "|optimizer=" << to_string(e.train.optimizer.kind)
        << "|activation=" << to_string(e.net.hidden_activation)
        << "|n_hidden=" << e.net.n_hidden_layers
        << "|neurons=" << e.net.neurons_per_hidden << "|epochs=" << e.train.epochs
        << "|batch_size=" << e.train.batch_size
        << "|lr=" << format_double(e.train.optimizer.learning_rate)
        << "|beta1=" << format_double(e.train.optimizer.beta1)
        << "|beta2=" << format_double(e.train.optimizer.beta2)
        << "|rho=" << format_double(e.train.optimizer.rho)
        << "|epsilon=" << format_double(e.train.optimizer.epsilon);
    return to_hex(fnv1a64(key.str()));
}

std::size_t parameter_count(const NetworkConfig& cfg) {
    std::size_t total = 0;
    std::size_t fan_in = cfg.n_inputs;
    for (std::size_t l = 0; l < cfg.n_hidden_layers; ++l) {
        total += cfg.neurons_per_hidden * fan_in + cfg.neurons_per_hidden;
        fan_in = cfg.neurons_per_hidden;
    }
    total += fan_in + 1; // output neuron
    return total;
}

std::string grid_record_to_json(const GridRecord& r) {
    json fold_r2 = json::array();
    for (const auto& v : r.fold_r2) {
        fold_r2.push_back(v ? json(*v) : json(nullptr));
    }
    json j{
        {"hash", r.hash},
        {"config",
         {{"loss", to_string(r.entry.train.loss)},
          {"optimizer", to_string(r.entry.train.optimizer.kind)},
          {"activation", to_string(r.entry.net.hidden_activation)},
          {"n_hidden", r.entry.net.n_hidden_layers},
          {"neurons", r.entry.net.neurons_per_hidden},
          {"epochs", r.entry.train.epochs},
          {"batch_size", r.entry.train.batch_size},
          {"learning_rate", r.entry.train.optimizer.learning_rate},
          {"beta1", r.entry.train.optimizer.beta1},
          {"beta2", r.entry.train.optimizer.beta2},
          {"rho", r.entry.train.optimizer.rho},
          {"epsilon", r.entry.train.optimizer.epsilon}}},
        {"fold_r2", fold_r2},
        {"fold_converged", r.fold_converged},
        {"mean_r2", r.mean_r2 ? json(*r.mean_r2) : json(nullptr)},
        {"n_converged", r.n_converged},
        {"seed", r.seed},
        {"epochs_used", r.epochs_used},
        {"wall_s", r.wall_s},
    };
    return j.dump();
}

GridRecord grid_record_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(std::string("corrupt grid record: ") + e.what());
    }
    try {
        GridRecord r;
        r.hash = j.at("hash").get<std::string>();
        const json& c = j.at("config");
        r.entry.net.n_inputs = 3;
        r.entry.net.n_hidden_layers = c.at("n_hidden").get<std::size_t>();
        r.entry.net.neurons_per_hidden = c.at("neurons").get<std::size_t>();
        r.entry.net.hidden_activation =
            activation_from_string(c.at("activation").get<std::string>());
        r.entry.net.output_activation = Activation::kLinear;
        r.entry.train.loss = loss_from_string(c.at("loss").get<std::string>());
        r.entry.train.optimizer.kind =
            optimizer_from_string(c.at("optimizer").get<std::string>());
        r.entry.train.optimizer.learning_rate = c.at("learning_rate").get<double>();
        r.entry.train.optimizer.beta1 = c.at("beta1").get<double>();
        r.entry.train.optimizer.beta2 = c.at("beta2").get<double>();
        r.entry.train.optimizer.rho = c.at("rho").get<double>();
        r.entry.train.optimizer.epsilon = c.at("epsilon").get<double>();
        r.entry.train.epochs = c.at("epochs").get<std::size_t>();
        r.entry.train.batch_size = c.at("batch_size").get<std::size_t>();
        for (const json& v : j.at("fold_r2")) {
            if (v.is_null()) {
                r.fold_r2.emplace_back(std::nullopt);
            } else {
                r.fold_r2.emplace_back(v.get<double>());
            }
        }
        r.fold_converged = j.at("fold_converged").get<std::vector<bool>>();
        if (!j.at("mean_r2").is_null()) {
            r.mean_r2 = j.at("mean_r2").get<double>();
        }
        r.n_converged = j.at("n_converged").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.epochs_used = j.at("epochs_used").get<std::size_t>();
        r.wall_s = j.at("wall_s").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("corrupt grid record: ") + e.what());
    }
}

GridResult run_grid(const std::vector<Sample>& samples, const GridSpec& spec,
                    const std::string& store_path, std::size_t workers,
                    std::ostream* progress) {
    spec.validate();
    if (samples.empty()) {
        throw DataError("empty dataset");
    }
    const std::vector<GridEntry> entries = enumerate_grid(spec);

    // Resume: previously stored records are keyed by config hash. A torn
    // trailing line (crash mid-write) parses as corrupt and is recomputed.
    std::map<std::string, GridRecord> done;
    {
        std::ifstream in(store_path);
        std::string line;
        while (in && std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            try {
                GridRecord r = grid_record_from_json(line);
                r.from_store = true;
                done[r.hash] = std::move(r);
            } catch (const DataError&) {
                continue;
            }
        }
    }

    std::vector<GridRecord> records(entries.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string hash = config_hash(entries[i]);
        auto it = done.find(hash);
        if (it != done.end()) {
            records[i] = it->second;
            records[i].entry = entries[i];
        } else {
            records[i].hash = hash;
            records[i].entry = entries[i];
            pending.push_back(i);
        }
    }

    std::ofstream store(store_path, std::ios::app);
    if (!store) {
        throw DataError("cannot open results store: " + store_path);
    }
    std::mutex store_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> finished{0};
    std::vector<std::exception_ptr> failures(pending.size());

    auto run_one = [&](std::size_t pending_idx) {
        const std::size_t idx = pending[pending_idx];
        GridRecord& r = records[idx];
        r.seed = derive_seed(spec.seed, kStreamGrid, fnv1a64(r.hash));
        CvOptions cv_opts;
        cv_opts.n_folds = spec.folds;
        cv_opts.seed = r.seed;
        cv_opts.workers = 1;
        const auto t0 = std::chrono::steady_clock::now();
        const CvReport report =
            cross_validate(samples, r.entry.net, r.entry.train, cv_opts);
        r.wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        for (const FoldResult& f : report.folds) {
            r.fold_r2.push_back(f.r2);
            r.fold_converged.push_back(f.converged);
        }
        r.mean_r2 = report.mean_r2;
        r.n_converged = report.n_converged;
        r.epochs_used = spec.epochs;
        {
            std::lock_guard<std::mutex> lock(store_mutex);
            store << grid_record_to_json(r) << '\n';
            store.flush();
            if (!store) {
                throw DataError("write failed on results store: " + store_path);
            }
            if (progress) {
                const std::size_t k = finished.fetch_add(1) + 1;
                *progress << "[grid] " << k << "/" << pending.size() << " "
                          << r.hash << " mean_r2="
                          << (r.mean_r2 ? format_double(*r.mean_r2) : "none")
                          << " converged=" << r.n_converged << "/" << spec.folds
                          << "\n";
                progress->flush();
            }
        }
    };

    const std::size_t pool_size =
        std::max<std::size_t>(1, std::min(workers, pending.size()));
    if (pool_size <= 1) {
        for (std::size_t p = 0; p < pending.size(); ++p) {
            run_one(p);
        }
    } else {
        auto worker = [&]() {
            for (;;) {
                const std::size_t p = next.fetch_add(1);
                if (p >= pending.size()) {
                    return;
                }
                try {
                    run_one(p);
                } catch (...) {
                    failures[p] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < pool_size; ++w) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
        for (const auto& err : failures) {
            if (err) {
                std::rethrow_exception(err);
            }
        }
    }

    GridResult result;
    result.records = std::move(records);
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        if (result.records[i].mean_r2) {
            result.ranking.push_back(i);
        }
    }
    std::sort(result.ranking.begin(), result.ranking.end(),
              [&](std::size_t a, std::size_t b) {
                  const GridRecord& ra = result.records[a];
                  const GridRecord& rb = result.records[b];
                  if (*ra.mean_r2 != *rb.mean_r2) {
                      return *ra.mean_r2 > *rb.mean_r2;
                  }
                  const std::size_t pa = parameter_count(ra.entry.net);
                  const std::size_t pb = parameter_count(rb.entry.net);
                  if (pa != pb) {
                      return pa < pb;
                  }
                  return a < b;
              });
    return result;
}

std::vector<SliceRow> slice_report(const GridResult& result, const std::string& vary,
                                   const std::map<std::string, std::string>& fixed) {
    bool vary_known = false;
    for (const std::string& axis : all_axes()) {
        if (axis == vary) {
            vary_known = true;
        }
    }
    if (!vary_known) {
        throw ConfigError("unknown grid axis: " + vary);
    }
    for (const std::string& axis : all_axes()) {
        if (axis == vary) {
            if (fixed.count(axis)) {
                throw ConfigError("axis " + axis + " cannot be both varied and fixed");
            }
            continue;
        }
        if (!fixed.count(axis)) {
            throw ConfigError("axis " + axis + " must be fixed for the slice");
        }
    }

    std::vector<SliceRow> rows;
    std::vector<std::string> seen_values;
    for (const GridRecord& r : result.records) {
        bool matches = true;
        for (const auto& [axis, value] : fixed) {
            if (axis_value_string(r.entry, axis) != value) {
                matches = false;
                break;
            }
        }
        if (!matches) {
            continue;
        }
        const std::string value = axis_value_string(r.entry, vary);
        if (std::find(seen_values.begin(), seen_values.end(), value) !=
            seen_values.end()) {
            throw ConfigError("grid contains duplicate configurations for the slice");
        }
        seen_values.push_back(value);
        rows.push_back({value, r.mean_r2, r.n_converged});
    }
    if (rows.empty()) {
        throw ConfigError("requested fixed point not in the grid");
    }
    return rows;
}

std::string slice_to_csv(const std::vector<SliceRow>& rows) {
    std::ostringstream out;
    out << "axis_value,mean_r2,n_converged\n";
    for (const SliceRow& r : rows) {
        out << r.axis_value << ','
            << (r.mean_r2 ? format_double(*r.mean_r2) : "") << ',' << r.n_converged
            << '\n';
    }
    return out.str();
}

} // namespace fatigue

#include "fatigue/model_io.hpp"

#include <json.hpp>

#include "fatigue/errors.hpp"
#include "fatigue/io_util.hpp"
#include "fatigue/version.hpp"

namespace fatigue {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "fatigue-ann-model";
constexpr int kFormatVersion = 1;

json range_to_json(const ScalerParams::Range& r) {
    return json{{"min", r.min}, {"max", r.max}};
}

ScalerParams::Range range_from_json(const json& j) {
    return {j.at("min").get<double>(), j.at("max").get<double>()};
}

json train_config_to_json(const TrainConfig& cfg) {
    return json{
        {"loss", to_string(cfg.loss)},
        {"optimizer",
         {{"kind", to_string(cfg.optimizer.kind)},
          {"learning_rate", cfg.optimizer.learning_rate},
          {"beta1", cfg.optimizer.beta1},
          {"beta2", cfg.optimizer.beta2},
          {"rho", cfg.optimizer.rho},
          {"epsilon", cfg.optimizer.epsilon}}},
        {"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},
        {"checkpoint_metric", cfg.checkpoint_metric == CheckpointMetric::kValidationLoss
                                  ? "validation_loss"
                                  : "training_loss"},
        {"divergence_patience", cfg.divergence_patience},
        {"seed", cfg.seed},
    };
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.loss = loss_from_string(j.at("loss").get<std::string>());
    const json& opt = j.at("optimizer");
    cfg.optimizer.kind = optimizer_from_string(opt.at("kind").get<std::string>());
    cfg.optimizer.learning_rate = opt.at("learning_rate").get<double>();
    cfg.optimizer.beta1 = opt.at("beta1").get<double>();
    cfg.optimizer.beta2 = opt.at("beta2").get<double>();
    cfg.optimizer.rho = opt.at("rho").get<double>();
    cfg.optimizer.epsilon = opt.at("epsilon").get<double>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    const std::string metric = j.at("checkpoint_metric").get<std::string>();
    if (metric == "validation_loss") {
        cfg.checkpoint_metric = CheckpointMetric::kValidationLoss;
    } else if (metric == "training_loss") {
        cfg.checkpoint_metric = CheckpointMetric::kTrainingLoss;
    } else {
        throw ConfigError("unknown checkpoint_metric: " + metric);
    }
    cfg.divergence_patience = j.at("divergence_patience").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

} // namespace

std::string model_to_json(const ModelFile& model) {
    json layers = json::array();
    for (const Layer& l : model.network.layers) {
        layers.push_back(json{
            {"rows", l.weights.rows},
            {"cols", l.weights.cols},
            {"activation", to_string(l.activation)},
            {"weights", l.weights.data}, // row-major
            {"bias", l.bias},
        });
    }
    json j{
        {"format", kFormatName},
        {"format_version", kFormatVersion},
        {"network",
         {{"n_inputs", model.config.n_inputs},
          {"n_hidden_layers", model.config.n_hidden_layers},
          {"neurons_per_hidden", model.config.neurons_per_hidden},
          {"hidden_activation", to_string(model.config.hidden_activation)},
          {"output_activation", to_string(model.config.output_activation)},
          {"seed", model.config.seed},
          {"layers", layers}}},
        {"scaler",
         {{"binder", range_to_json(model.scaler.binder)},
          {"voids", range_to_json(model.scaler.voids)},
          {"strain", range_to_json(model.scaler.strain)}}},
        {"provenance",
         {{"tool_version", model.provenance.tool_version},
          {"seed", model.provenance.seed},
          {"dataset_hash", model.provenance.dataset_hash},
          {"train_config", train_config_to_json(model.provenance.train_config)},
          {"best_epoch", model.provenance.best_epoch},
          {"converged", model.provenance.converged},
          {"training_points", model.provenance.training_points},
          {"strain_range", model.provenance.strain_range}}},
    };
    return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file corrupt: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormatName) {
            throw DataError("model file corrupt: wrong format tag");
        }
        if (j.at("format_version").get<int>() != kFormatVersion) {
            throw DataError("model file corrupt: unsupported format version");
        }
        ModelFile model;
        const json& net = j.at("network");
        model.config.n_inputs = net.at("n_inputs").get<std::size_t>();
        model.config.n_hidden_layers = net.at("n_hidden_layers").get<std::size_t>();
        model.config.neurons_per_hidden =
            net.at("neurons_per_hidden").get<std::size_t>();
        model.config.hidden_activation =
            activation_from_string(net.at("hidden_activation").get<std::string>());
        model.config.output_activation =
            activation_from_string(net.at("output_activation").get<std::string>());
        model.config.seed = net.at("seed").get<std::uint64_t>();
        for (const json& jl : net.at("layers")) {
            Layer l;
            const auto rows = jl.at("rows").get<std::size_t>();
            const auto cols = jl.at("cols").get<std::size_t>();
            l.activation = activation_from_string(jl.at("activation").get<std::string>());
            l.weights.resize(rows, cols);
            const auto weights = jl.at("weights").get<std::vector<double>>();
            if (weights.size() != rows * cols) {
                throw DataError("model file corrupt: weight count does not match shape");
            }
            l.weights.data = weights;
            l.bias = jl.at("bias").get<std::vector<double>>();
            if (l.bias.size() != rows) {
                throw DataError("model file corrupt: bias count does not match shape");
            }
            model.network.layers.push_back(std::move(l));
        }
        const json& sc = j.at("scaler");
        model.scaler.binder = range_from_json(sc.at("binder"));
        model.scaler.voids = range_from_json(sc.at("voids"));
        model.scaler.strain = range_from_json(sc.at("strain"));
        const json& prov = j.at("provenance");
        model.provenance.tool_version = prov.at("tool_version").get<std::string>();
        model.provenance.seed = prov.at("seed").get<std::uint64_t>();
        model.provenance.dataset_hash = prov.at("dataset_hash").get<std::string>();
        model.provenance.train_config =
            train_config_from_json(prov.at("train_config"));
        model.provenance.best_epoch = prov.at("best_epoch").get<std::size_t>();
        model.provenance.converged = prov.at("converged").get<bool>();
        model.provenance.training_points =
            prov.at("training_points").get<std::vector<std::array<double, 2>>>();
        model.provenance.strain_range =
            prov.at("strain_range").get<std::array<double, 2>>();
        try {
            model.network.check();
        } catch (const std::exception& e) {
            throw DataError(std::string("model file corrupt: ") + e.what());
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file corrupt: ") + e.what());
    }
}

void save_model(const ModelFile& model, const std::string& path) {
    write_file(path, model_to_json(model));
}

ModelFile load_model(const std::string& path) {
    return model_from_json(read_file(path));
}

} // namespace fatigue

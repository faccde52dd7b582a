#include "fatigue/network.hpp"

#include <cmath>

#include "fatigue/errors.hpp"
#include "fatigue/rng.hpp"

namespace fatigue {

namespace {

void ensure_shape(Matrix& m, std::size_t r, std::size_t c) {
    if (m.rows != r || m.cols != c) {
        m.resize(r, c);
    }
}

void apply_activation(Activation a, const Matrix& pre, Matrix& act) {
    const double* __restrict z = pre.data.data();
    double* __restrict out = act.data.data();
    const std::size_t n = pre.data.size();
    switch (a) {
    case Activation::kReLU:
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = z[i] > 0.0 ? z[i] : (z[i] == z[i] ? 0.0 : z[i]);
        }
        break;
    case Activation::kLinear:
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = z[i];
        }
        break;
    case Activation::kSigmoid:
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = 1.0 / (1.0 + std::exp(-z[i]));
        }
        break;
    case Activation::kTanh:
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = std::tanh(z[i]);
        }
        break;
    }
}

} // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::kReLU;
    if (name == "linear") return Activation::kLinear;
    if (name == "sigmoid") return Activation::kSigmoid;
    if (name == "tanh") return Activation::kTanh;
    throw ConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
    case Activation::kReLU: return "relu";
    case Activation::kLinear: return "linear";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    }
    throw ConfigError("unknown activation enum value");
}

double activate(Activation a, double z) {
    switch (a) {
    case Activation::kReLU: return z > 0.0 ? z : (z == z ? 0.0 : z);
    case Activation::kLinear: return z;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kTanh: return std::tanh(z);
    }
    throw ConfigError("unknown activation enum value");
}

double activate_derivative(Activation a, double z) {
    switch (a) {
    case Activation::kReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kLinear: return 1.0;
    case Activation::kSigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-z));
        return s * (1.0 - s);
    }
    case Activation::kTanh: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    }
    throw ConfigError("unknown activation enum value");
}

void NetworkConfig::validate() const {
    if (n_inputs == 0) {
        throw ConfigError("n_inputs must be positive");
    }
    if (n_hidden_layers == 0) {
        throw ConfigError("n_hidden_layers must be positive");
    }
    if (neurons_per_hidden == 0) {
        throw ConfigError("neurons_per_hidden must be positive");
    }
}

std::size_t Network::n_inputs() const {
    return layers.empty() ? 0 : layers.front().weights.cols;
}

std::size_t Network::n_outputs() const {
    return layers.empty() ? 0 : layers.back().weights.rows;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) {
        n += l.weights.data.size() + l.bias.size();
    }
    return n;
}

void Network::check() const {
    if (layers.empty()) {
        throw ConfigError("network has no layers");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        if (l.bias.size() != l.weights.rows) {
            throw ConfigError("bias size does not match layer width");
        }
        if (i > 0 && l.weights.cols != layers[i - 1].weights.rows) {
            throw ConfigError("layer shape chain broken");
        }
        if (!all_finite(l.weights) || !all_finite(l.bias.data(), l.bias.size())) {
            throw NumericError("network parameters non-finite");
        }
    }
}

Network init_network(const NetworkConfig& cfg) {
    cfg.validate();
    Network net;
    Rng rng(cfg.seed);
    std::vector<std::size_t> widths;
    widths.push_back(cfg.n_inputs);
    for (std::size_t i = 0; i < cfg.n_hidden_layers; ++i) {
        widths.push_back(cfg.neurons_per_hidden);
    }
    widths.push_back(1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t fan_in = widths[l];
        const std::size_t fan_out = widths[l + 1];
        Layer layer;
        layer.weights.resize(fan_out, fan_in);
        layer.bias.assign(fan_out, 0.0);
        layer.activation = (l + 2 == widths.size()) ? cfg.output_activation
                                                    : cfg.hidden_activation;
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& w : layer.weights.data) {
            w = rng.uniform(-limit, limit);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

void forward_trace(const Network& net, const Matrix& input_t, ForwardTrace& trace) {
    if (net.layers.empty()) {
        throw ConfigError("network has no layers");
    }
    if (input_t.rows != net.n_inputs()) {
        throw ConfigError("input feature count does not match network");
    }
    const std::size_t depth = net.layers.size();
    const std::size_t batch = input_t.cols;
    trace.pre.resize(depth);
    trace.act.resize(depth + 1);
    if (!trace.act[0].same_shape(input_t)) {
        trace.act[0].resize(input_t.rows, input_t.cols);
    }
    trace.act[0].data = input_t.data;
    for (std::size_t l = 0; l < depth; ++l) {
        const Layer& layer = net.layers[l];
        ensure_shape(trace.pre[l], layer.weights.rows, batch);
        ensure_shape(trace.act[l + 1], layer.weights.rows, batch);
        matmul_bias(layer.weights, trace.act[l], layer.bias, trace.pre[l]);
        if (!all_finite(trace.pre[l])) {
            throw NumericError("numerical overflow in forward pass");
        }
        apply_activation(layer.activation, trace.pre[l], trace.act[l + 1]);
    }
}

double forward(const Network& net, std::span<const double> x) {
    ForwardTrace trace;
    return forward(net, x, trace);
}

double forward(const Network& net, std::span<const double> x, ForwardTrace& trace) {
    if (x.size() != net.n_inputs()) {
        throw ConfigError("input feature count does not match network");
    }
    if (net.n_outputs() != 1) {
        throw ConfigError("forward expects a single-output network");
    }
    Matrix input(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        input.at(i, 0) = x[i];
    }
    forward_trace(net, input, trace);
    return trace.act.back().at(0, 0);
}

std::vector<double> forward_batch(const Network& net, const Matrix& X) {
    if (net.n_outputs() != 1) {
        throw ConfigError("forward_batch expects a single-output network");
    }
    if (X.cols != net.n_inputs()) {
        throw ConfigError("input feature count does not match network");
    }
    std::vector<double> out(X.rows, 0.0);
    if (X.rows == 0) {
        return out;
    }
    const Matrix input_t = transpose(X);
    ForwardTrace trace;
    forward_trace(net, input_t, trace);
    const Matrix& last = trace.act.back();
    for (std::size_t i = 0; i < X.rows; ++i) {
        out[i] = last.at(0, i);
    }
    return out;
}

} // namespace fatigue

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fatigue/matrix.hpp"

namespace fatigue {

enum class Activation { kReLU, kLinear, kSigmoid, kTanh };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

double activate(Activation a, double z);
/// Derivative with respect to the pre-activation. ReLU'(0) is defined as 0.
double activate_derivative(Activation a, double z);

struct NetworkConfig {
    std::size_t n_inputs = 3;
    std::size_t n_hidden_layers = 2;
    std::size_t neurons_per_hidden = 200;
    Activation hidden_activation = Activation::kReLU;
    Activation output_activation = Activation::kLinear;
    std::uint64_t seed = 0;

    /// Throws ConfigError on zero sizes.
    void validate() const;
};

struct Layer {
    Matrix weights;            // fan_out x fan_in
    std::vector<double> bias;  // fan_out, initialised to zero
    Activation activation = Activation::kLinear;
};

struct Network {
    std::vector<Layer> layers;

    std::size_t n_inputs() const;
    std::size_t n_outputs() const;
    std::size_t parameter_count() const;

    /// Verifies the layer chain is consistent and all parameters finite.
    void check() const;
};

/// Fresh network with Glorot-uniform weights, limit sqrt(6/(fan_in+fan_out)),
/// drawn row-major layer by layer from a generator seeded with cfg.seed.
/// Biases start at zero. Same config and seed reproduce the same weights.
Network init_network(const NetworkConfig& cfg);

/// Pre-activations and activations for one batch; act[0] is the input block.
/// All blocks are neurons x batch.
struct ForwardTrace {
    std::vector<Matrix> pre;
    std::vector<Matrix> act;
};

/// Batched forward pass. input_t is features x batch. Throws NumericError
/// ("numerical overflow in forward pass") when any pre-activation is
/// non-finite. Each column is computed independently of the others, so a
/// sample's output does not depend on what it is batched with.
void forward_trace(const Network& net, const Matrix& input_t, ForwardTrace& trace);

/// Single-sample forward pass; x.size() must equal n_inputs, output width 1.
double forward(const Network& net, std::span<const double> x);
double forward(const Network& net, std::span<const double> x, ForwardTrace& trace);

/// One prediction per row of X (rows = samples, cols = features).
std::vector<double> forward_batch(const Network& net, const Matrix& X);

} // namespace fatigue

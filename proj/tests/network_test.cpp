#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fatigue/errors.hpp"
#include "fatigue/network.hpp"
#include "fatigue/rng.hpp"

namespace fatigue {
namespace {

Network single_layer(std::vector<double> w, double b, Activation act,
                     std::size_t fan_in) {
    Network net;
    Layer l;
    l.weights.resize(1, fan_in);
    l.weights.data = std::move(w);
    l.bias = {b};
    l.activation = act;
    net.layers.push_back(std::move(l));
    return net;
}

TEST(Activation, PointwiseValues) {
    EXPECT_DOUBLE_EQ(activate(Activation::kReLU, 3.5), 3.5);
    EXPECT_DOUBLE_EQ(activate(Activation::kReLU, -2.0), 0.0);
    EXPECT_DOUBLE_EQ(activate(Activation::kReLU, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(activate(Activation::kLinear, -7.25), -7.25);
    EXPECT_DOUBLE_EQ(activate(Activation::kSigmoid, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(activate(Activation::kTanh, 0.0), 0.0);
    EXPECT_NEAR(activate(Activation::kSigmoid, 15.0), 1.0, 1e-4);
    EXPECT_NEAR(activate(Activation::kSigmoid, -15.0), 0.0, 1e-4);
}

TEST(Activation, ReluDerivativeAtZeroIsZero) {
    EXPECT_DOUBLE_EQ(activate_derivative(Activation::kReLU, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(activate_derivative(Activation::kReLU, 1e-12), 1.0);
    EXPECT_DOUBLE_EQ(activate_derivative(Activation::kReLU, -1e-12), 0.0);
}

// central finite differences, h = 1e-6, away from the ReLU kink
TEST(Activation, DerivativesMatchFiniteDifferences) {
    const double h = 1e-6;
    const double points[] = {-2.0, -0.7, -0.1, 0.1, 0.4, 1.3, 2.5};
    for (Activation a : {Activation::kReLU, Activation::kLinear,
                         Activation::kSigmoid, Activation::kTanh}) {
        for (double z : points) {
            const double fd = (activate(a, z + h) - activate(a, z - h)) / (2 * h);
            EXPECT_NEAR(activate_derivative(a, z), fd, 1e-6)
                << to_string(a) << " at z=" << z;
        }
    }
}

TEST(Activation, StringRoundTrip) {
    for (Activation a : {Activation::kReLU, Activation::kLinear,
                         Activation::kSigmoid, Activation::kTanh}) {
        EXPECT_EQ(activation_from_string(to_string(a)), a);
    }
    EXPECT_THROW(activation_from_string("swish"), ConfigError);
}

TEST(InitNetwork, StudyShapeAndGlorotBounds) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 2;
    cfg.neurons_per_hidden = 200;
    cfg.seed = 42;
    const Network net = init_network(cfg);
    ASSERT_EQ(net.layers.size(), 3u);
    EXPECT_EQ(net.layers[0].weights.rows, 200u);
    EXPECT_EQ(net.layers[0].weights.cols, 3u);
    EXPECT_EQ(net.layers[1].weights.rows, 200u);
    EXPECT_EQ(net.layers[1].weights.cols, 200u);
    EXPECT_EQ(net.layers[2].weights.rows, 1u);
    EXPECT_EQ(net.layers[2].weights.cols, 200u);

    for (const Layer& l : net.layers) {
        const double fan_in = static_cast<double>(l.weights.cols);
        const double fan_out = static_cast<double>(l.weights.rows);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double w : l.weights.data) {
            EXPECT_LE(std::abs(w), limit);
        }
        for (double b : l.bias) {
            EXPECT_EQ(b, 0.0);
        }
    }
}

TEST(InitNetwork, SameSeedBitIdentical) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 3;
    cfg.neurons_per_hidden = 7;
    cfg.seed = 42;
    const Network a = init_network(cfg);
    const Network b = init_network(cfg);
    ASSERT_EQ(a.layers.size(), b.layers.size());
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        EXPECT_EQ(a.layers[l].weights.data, b.layers[l].weights.data);
        EXPECT_EQ(a.layers[l].bias, b.layers[l].bias);
    }
}

TEST(InitNetwork, DifferentSeedDifferentWeights) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 1;
    cfg.neurons_per_hidden = 8;
    cfg.seed = 1;
    const Network a = init_network(cfg);
    cfg.seed = 2;
    const Network b = init_network(cfg);
    EXPECT_NE(a.layers[0].weights.data, b.layers[0].weights.data);
}

TEST(NetworkConfig, RejectsZeroSizes) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.n_hidden_layers = 1;
    cfg.neurons_per_hidden = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.neurons_per_hidden = 4;
    cfg.n_inputs = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Network, CheckRejectsBrokenChain) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 2;
    cfg.neurons_per_hidden = 4;
    Network net = init_network(cfg);
    net.layers[1].weights.resize(4, 5); // fan-in no longer matches
    EXPECT_THROW(net.check(), ConfigError);
}

TEST(Forward, ZeroNetworkPredictsZero) {
    Network net = single_layer({0, 0, 0}, 0.0, Activation::kLinear, 3);
    const double x[] = {3.0, -1.0, 12.5};
    EXPECT_DOUBLE_EQ(forward(net, x), 0.0);
}

// W=[[1,2,3]], b=[1], x=(1,1,1) -> 1+2+3+1 = 7
TEST(Forward, SingleLinearLayerHandValue) {
    Network net = single_layer({1, 2, 3}, 1.0, Activation::kLinear, 3);
    const double x[] = {1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(forward(net, x), 7.0);
}

TEST(Forward, AllNegativePreActivationsGiveOutputBias) {
    // hidden ReLU layer forced negative, output = bias of the linear head
    Network net;
    Layer hidden;
    hidden.weights.resize(4, 3);
    for (double& w : hidden.weights.data) {
        w = -1.0;
    }
    hidden.bias = {-1, -1, -1, -1};
    hidden.activation = Activation::kReLU;
    Layer out;
    out.weights.resize(1, 4);
    for (double& w : out.weights.data) {
        w = 5.0;
    }
    out.bias = {2.5};
    out.activation = Activation::kLinear;
    net.layers.push_back(std::move(hidden));
    net.layers.push_back(std::move(out));

    const double x[] = {1.0, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(forward(net, x), 2.5);
}

TEST(Forward, PureFunctionOfInputs) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 2;
    cfg.neurons_per_hidden = 6;
    cfg.seed = 9;
    const Network net = init_network(cfg);
    const double x[] = {0.3, 0.7, 0.1};
    const double first = forward(net, x);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(forward(net, x), first);
    }
}

TEST(Forward, OverflowThrowsNumericError) {
    Network net;
    Layer l1 = {Matrix(1, 3), {0.0}, Activation::kLinear};
    l1.weights.data = {1e308, 1e308, 1e308};
    Layer l2 = {Matrix(1, 1), {0.0}, Activation::kLinear};
    l2.weights.data = {1e308};
    net.layers.push_back(std::move(l1));
    net.layers.push_back(std::move(l2));
    const double x[] = {1e5, 1e5, 1e5};
    try {
        forward(net, x);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_STREQ(e.what(), "numerical overflow in forward pass");
    }
}

TEST(Forward, WrongArityThrows) {
    Network net = single_layer({1, 2, 3}, 0.0, Activation::kLinear, 3);
    const double x[] = {1.0, 2.0};
    EXPECT_THROW(forward(net, x), ConfigError);
}

TEST(ForwardBatch, SingleRowEqualsForward) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 1;
    cfg.neurons_per_hidden = 5;
    cfg.seed = 4;
    const Network net = init_network(cfg);
    Matrix X(1, 3);
    X.data = {0.2, 0.9, 0.5};
    const auto batch = forward_batch(net, X);
    ASSERT_EQ(batch.size(), 1u);
    EXPECT_DOUBLE_EQ(batch[0], forward(net, X.data));
}

TEST(ForwardBatch, DuplicatedRowsIdenticalOutputs) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 2;
    cfg.neurons_per_hidden = 8;
    cfg.seed = 17;
    const Network net = init_network(cfg);
    Matrix X(6, 3);
    for (std::size_t r = 0; r < 6; ++r) {
        X.at(r, 0) = 0.1;
        X.at(r, 1) = 0.8;
        X.at(r, 2) = 0.4;
    }
    const auto out = forward_batch(net, X);
    for (double v : out) {
        EXPECT_EQ(v, out[0]);
    }
}

TEST(ForwardBatch, MatchesPerRowOracle) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 2;
    cfg.neurons_per_hidden = 9;
    cfg.seed = 23;
    const Network net = init_network(cfg);
    Rng rng(5);
    Matrix X(5, 3);
    for (double& v : X.data) {
        v = rng.uniform(-1.0, 1.0);
    }
    const auto out = forward_batch(net, X);
    ASSERT_EQ(out.size(), 5u);
    for (std::size_t r = 0; r < 5; ++r) {
        const double expected = forward(net, std::span(X.row(r), 3));
        const double denom = std::max(std::abs(expected), 1e-30);
        EXPECT_LE(std::abs(out[r] - expected) / denom, 1e-12);
    }
}

TEST(Network, ParameterCountAndArity) {
    NetworkConfig cfg;
    cfg.n_hidden_layers = 2;
    cfg.neurons_per_hidden = 200;
    const Network net = init_network(cfg);
    EXPECT_EQ(net.n_inputs(), 3u);
    EXPECT_EQ(net.n_outputs(), 1u);
    // 3*200+200 + 200*200+200 + 200*1+1
    EXPECT_EQ(net.parameter_count(), 800u + 40200u + 201u);
}

} // namespace
} // namespace fatigue

#include "fatigue/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fatigue/errors.hpp"
#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"

namespace fatigue {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parameters_identical(const Network& a, const Network& b) {
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].weights.data != b.layers[l].weights.data ||
            a.layers[l].bias != b.layers[l].bias) {
            return false;
        }
    }
    return true;
}

void ensure_shape(Matrix& m, std::size_t r, std::size_t c) {
    if (m.rows != r || m.cols != c) {
        m.resize(r, c);
    }
}

// Sum of per-sample loss terms (division by n is the caller's business).
// No validation, NaN passes through: the training loop relies on non-finite
// losses surfacing as-is for divergence detection.
double loss_term_sum(LossKind kind, const double* y, const double* pred, std::size_t n) {
    double s = 0.0;
    if (kind == LossKind::kMSE) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = pred[i] - y[i];
            s += d * d;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double clamped = pred[i] > 0.0 ? pred[i] : 0.0;
            const double r = std::log1p(y[i]) - std::log1p(clamped);
            s += r * r;
        }
    }
    return s;
}

void loss_gradient_into(LossKind kind, const double* y, const double* pred,
                        std::size_t n, double* out) {
    const double scale = 2.0 / static_cast<double>(n);
    if (kind == LossKind::kMSE) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = scale * (pred[i] - y[i]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] < 0.0) {
                // clamp active: no gradient flows
                out[i] = 0.0;
            } else {
                const double r = std::log1p(y[i]) - std::log1p(pred[i]);
                out[i] = -scale * r / (pred[i] + 1.0);
            }
        }
    }
}

void multiply_derivative_inplace(Activation a, const Matrix& pre, Matrix& d) {
    const double* __restrict z = pre.data.data();
    double* __restrict p = d.data.data();
    const std::size_t n = d.data.size();
    switch (a) {
    case Activation::kReLU:
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z[i] > 0.0 ? p[i] : 0.0;
        }
        break;
    case Activation::kLinear:
        break;
    case Activation::kSigmoid:
        for (std::size_t i = 0; i < n; ++i) {
            const double s = 1.0 / (1.0 + std::exp(-z[i]));
            p[i] *= s * (1.0 - s);
        }
        break;
    case Activation::kTanh:
        for (std::size_t i = 0; i < n; ++i) {
            const double t = std::tanh(z[i]);
            p[i] *= 1.0 - t * t;
        }
        break;
    }
}

struct BackpropWorkspace {
    ForwardTrace trace;
    std::vector<Matrix> delta;
    Gradients grads;
};

// Batch backward pass. input_t is features x B. Fills ws.grads with the
// gradients of the mean batch loss and returns the per-sample term sum.
double backprop_core(const Network& net, const Matrix& input_t, const double* y,
                     std::size_t batch, LossKind kind, BackpropWorkspace& ws) {
    forward_trace(net, input_t, ws.trace);
    const std::size_t depth = net.layers.size();
    ws.delta.resize(depth);
    if (ws.grads.w.size() != depth) {
        ws.grads = Gradients::zeros_like(net);
    }
    const double* pred = ws.trace.act[depth].row(0);
    const double term_sum = loss_term_sum(kind, y, pred, batch);

    ensure_shape(ws.delta[depth - 1], 1, batch);
    loss_gradient_into(kind, y, pred, batch, ws.delta[depth - 1].row(0));
    multiply_derivative_inplace(net.layers[depth - 1].activation,
                                ws.trace.pre[depth - 1], ws.delta[depth - 1]);
    for (std::size_t l = depth; l-- > 0;) {
        matmul_a_bt(ws.delta[l], ws.trace.act[l], ws.grads.w[l]);
        row_sums(ws.delta[l], ws.grads.b[l]);
        if (l > 0) {
            ensure_shape(ws.delta[l - 1], net.layers[l - 1].weights.rows, batch);
            matmul_at_b(net.layers[l].weights, ws.delta[l], ws.delta[l - 1]);
            multiply_derivative_inplace(net.layers[l - 1].activation,
                                        ws.trace.pre[l - 1], ws.delta[l - 1]);
        }
    }
    for (std::size_t l = 0; l < depth; ++l) {
        if (!all_finite(ws.grads.w[l]) ||
            !all_finite(ws.grads.b[l].data(), ws.grads.b[l].size())) {
            throw NumericError("gradient overflow");
        }
    }
    return term_sum;
}

double eval_loss(const Network& net, const Matrix& input_t, std::span<const double> y,
                 LossKind kind, ForwardTrace& trace) {
    try {
        forward_trace(net, input_t, trace);
    } catch (const NumericError&) {
        return kNaN;
    }
    const double* pred = trace.act.back().row(0);
    return loss_term_sum(kind, y.data(), pred, y.size()) /
           static_cast<double>(y.size());
}

} // namespace

LossKind loss_from_string(const std::string& name) {
    if (name == "mse") return LossKind::kMSE;
    if (name == "msle") return LossKind::kMSLE;
    throw ConfigError("unknown loss: " + name);
}

std::string to_string(LossKind k) {
    return k == LossKind::kMSE ? "mse" : "msle";
}

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "adam") return OptimizerKind::kAdam;
    if (name == "nadam") return OptimizerKind::kNadam;
    if (name == "rmsprop") return OptimizerKind::kRMSprop;
    throw ConfigError("unknown optimizer: " + name);
}

std::string to_string(OptimizerKind k) {
    switch (k) {
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kNadam: return "nadam";
    case OptimizerKind::kRMSprop: return "rmsprop";
    }
    throw ConfigError("unknown optimizer enum value");
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be positive");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0)) {
        throw ConfigError("beta1 must lie in (0,1)");
    }
    if (!(beta2 > 0.0 && beta2 < 1.0)) {
        throw ConfigError("beta2 must lie in (0,1)");
    }
    if (!(rho > 0.0 && rho < 1.0)) {
        throw ConfigError("rho must lie in (0,1)");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ConfigError("epsilon must be positive");
    }
}

void TrainConfig::validate() const {
    optimizer.validate();
    if (epochs == 0) {
        throw ConfigError("epochs must be at least 1");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    if (divergence_patience == 0) {
        throw ConfigError("divergence_patience must be positive");
    }
}

OptimizerState OptimizerState::for_network(const Network& net, OptimizerKind kind) {
    OptimizerState s;
    const bool needs_m = kind != OptimizerKind::kRMSprop;
    for (const Layer& l : net.layers) {
        s.v_w.emplace_back(l.weights.rows, l.weights.cols);
        s.v_b.emplace_back(l.bias.size(), 0.0);
        if (needs_m) {
            s.m_w.emplace_back(l.weights.rows, l.weights.cols);
            s.m_b.emplace_back(l.bias.size(), 0.0);
        }
    }
    return s;
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    for (const Layer& l : net.layers) {
        g.w.emplace_back(l.weights.rows, l.weights.cols);
        g.b.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

double compute_loss(LossKind kind, std::span<const double> y_true,
                    std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw std::invalid_argument("compute_loss: length mismatch or empty input");
    }
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (!std::isfinite(y_true[i]) || !std::isfinite(y_pred[i])) {
            throw NumericError("non-finite inputs to loss");
        }
        if (kind == LossKind::kMSLE && y_true[i] <= -1.0) {
            throw DataError("MSLE requires targets greater than -1");
        }
    }
    return loss_term_sum(kind, y_true.data(), y_pred.data(), y_true.size()) /
           static_cast<double>(y_true.size());
}

std::vector<double> loss_gradient(LossKind kind, std::span<const double> y_true,
                                  std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw std::invalid_argument("loss_gradient: length mismatch or empty input");
    }
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (!std::isfinite(y_true[i]) || !std::isfinite(y_pred[i])) {
            throw NumericError("non-finite inputs to loss");
        }
        if (kind == LossKind::kMSLE && y_true[i] <= -1.0) {
            throw DataError("MSLE requires targets greater than -1");
        }
    }
    std::vector<double> out(y_true.size(), 0.0);
    loss_gradient_into(kind, y_true.data(), y_pred.data(), y_true.size(), out.data());
    return out;
}

Gradients backprop(const Network& net, const Matrix& X, std::span<const double> y,
                   LossKind kind) {
    net.check();
    if (X.rows == 0) {
        throw std::invalid_argument("backprop: empty batch");
    }
    if (y.size() != X.rows) {
        throw std::invalid_argument("backprop: target count does not match batch");
    }
    if (net.n_outputs() != 1) {
        throw ConfigError("backprop expects a single-output network");
    }
    const Matrix input_t = transpose(X);
    BackpropWorkspace ws;
    backprop_core(net, input_t, y.data(), X.rows, kind, ws);
    return std::move(ws.grads);
}

void optimizer_step(const OptimizerConfig& cfg, OptimizerState& state, Network& net,
                    const Gradients& grads) {
    const std::size_t depth = net.layers.size();
    const bool needs_m = cfg.kind != OptimizerKind::kRMSprop;
    if (state.v_w.size() != depth || grads.w.size() != depth ||
        (needs_m && state.m_w.size() != depth)) {
        throw ConfigError("optimizer state does not match network");
    }
    for (std::size_t l = 0; l < depth; ++l) {
        if (!state.v_w[l].same_shape(net.layers[l].weights) ||
            !grads.w[l].same_shape(net.layers[l].weights) ||
            state.v_b[l].size() != net.layers[l].bias.size()) {
            throw ConfigError("optimizer state does not match network");
        }
    }

    state.t += 1;
    const double lr = cfg.learning_rate;
    const double eps = cfg.epsilon;

    if (cfg.kind == OptimizerKind::kRMSprop) {
        const double rho = cfg.rho;
        auto update = [&](double* __restrict th, const double* __restrict g,
                          double* __restrict v, std::size_t n) {
#pragma omp simd
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = rho * v[i] + (1.0 - rho) * g[i] * g[i];
                th[i] -= lr * g[i] / (std::sqrt(v[i]) + eps);
            }
        };
        for (std::size_t l = 0; l < depth; ++l) {
            update(net.layers[l].weights.data.data(), grads.w[l].data.data(),
                   state.v_w[l].data.data(), grads.w[l].data.size());
            update(net.layers[l].bias.data(), grads.b[l].data(),
                   state.v_b[l].data(), grads.b[l].size());
        }
        return;
    }

    const double b1 = cfg.beta1;
    const double b2 = cfg.beta2;
    state.beta1_pow *= b1; // beta1^t
    state.beta2_pow *= b2; // beta2^t
    const double bc1 = 1.0 / (1.0 - state.beta1_pow);
    const double bc2 = 1.0 / (1.0 - state.beta2_pow);

    if (cfg.kind == OptimizerKind::kAdam) {
        auto update = [&](double* __restrict th, const double* __restrict g,
                          double* __restrict v, double* __restrict m, std::size_t n) {
#pragma omp simd
            for (std::size_t i = 0; i < n; ++i) {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                const double mhat = m[i] * bc1;
                const double vhat = v[i] * bc2;
                th[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        };
        for (std::size_t l = 0; l < depth; ++l) {
            update(net.layers[l].weights.data.data(), grads.w[l].data.data(),
                   state.v_w[l].data.data(), state.m_w[l].data.data(),
                   grads.w[l].data.size());
            update(net.layers[l].bias.data(), grads.b[l].data(), state.v_b[l].data(),
                   state.m_b[l].data(), grads.b[l].size());
        }
        return;
    }

    // Nadam: Adam with a Nesterov-adjusted numerator.
    auto update = [&](double* __restrict th, const double* __restrict g,
                      double* __restrict v, double* __restrict m, std::size_t n) {
#pragma omp simd
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] * bc1;
            const double mprime = b1 * mhat + (1.0 - b1) * bc1 * g[i];
            const double vhat = v[i] * bc2;
            th[i] -= lr * mprime / (std::sqrt(vhat) + eps);
        }
    };
    for (std::size_t l = 0; l < depth; ++l) {
        update(net.layers[l].weights.data.data(), grads.w[l].data.data(),
               state.v_w[l].data.data(), state.m_w[l].data.data(),
               grads.w[l].data.size());
        update(net.layers[l].bias.data(), grads.b[l].data(), state.v_b[l].data(),
               state.m_b[l].data(), grads.b[l].size());
    }
}

TrainResult train(const Network& initial, const Matrix& X_train,
                  std::span<const double> y_train, const Matrix& X_val,
                  std::span<const double> y_val, const TrainConfig& cfg) {
    cfg.validate();
    initial.check();
    if (initial.n_outputs() != 1) {
        throw ConfigError("train expects a single-output network");
    }
    if (X_train.rows == 0) {
        throw DataError("training split is empty");
    }
    if (X_train.cols != initial.n_inputs()) {
        throw ConfigError("training features do not match network inputs");
    }
    if (y_train.size() != X_train.rows || y_val.size() != X_val.rows) {
        throw std::invalid_argument("train: target count does not match split");
    }
    const bool has_val = X_val.rows > 0;
    if (cfg.checkpoint_metric == CheckpointMetric::kValidationLoss && !has_val) {
        throw ConfigError("validation split required for validation-loss checkpointing");
    }
    if (has_val && X_val.cols != initial.n_inputs()) {
        throw ConfigError("validation features do not match network inputs");
    }

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = X_train.rows;
    const std::size_t batch = std::min(cfg.batch_size, n);
    const std::size_t remainder = n % batch;

    TrainResult res;
    res.best = initial;
    Network net = initial;
    OptimizerState state = OptimizerState::for_network(net, cfg.optimizer.kind);
    Rng rng(cfg.seed);

    const Matrix Xtr_t = transpose(X_train);
    const Matrix Xval_t = transpose(X_val);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    BackpropWorkspace ws_full;
    BackpropWorkspace ws_rem;
    Matrix in_full(X_train.cols, batch);
    Matrix in_rem(X_train.cols, remainder);
    std::vector<double> y_full(batch, 0.0);
    std::vector<double> y_rem(remainder, 0.0);
    ForwardTrace val_trace;

    res.history.train_loss.reserve(cfg.epochs);
    res.history.val_loss.reserve(cfg.epochs);

    double best_metric = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    double first_loss = kNaN;
    std::size_t blowup_streak = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double term_sum = 0.0;
        bool numeric_failure = false;
        try {
            std::size_t pos = 0;
            while (pos < n) {
                const std::size_t width = std::min(batch, n - pos);
                Matrix& in = (width == batch) ? in_full : in_rem;
                std::vector<double>& yb = (width == batch) ? y_full : y_rem;
                BackpropWorkspace& ws = (width == batch) ? ws_full : ws_rem;
                for (std::size_t j = 0; j < width; ++j) {
                    const std::size_t src = order[pos + j];
                    for (std::size_t f = 0; f < X_train.cols; ++f) {
                        in.at(f, j) = Xtr_t.at(f, src);
                    }
                    yb[j] = y_train[src];
                }
                term_sum += backprop_core(net, in, yb.data(), width, cfg.loss, ws);
                optimizer_step(cfg.optimizer, state, net, ws.grads);
                pos += width;
            }
        } catch (const NumericError&) {
            numeric_failure = true;
        }
        if (numeric_failure) {
            res.converged = false;
            break;
        }
        const double train_loss = term_sum / static_cast<double>(n);
        const double val_loss =
            has_val ? eval_loss(net, Xval_t, y_val, cfg.loss, val_trace) : kNaN;
        res.history.train_loss.push_back(train_loss);
        res.history.val_loss.push_back(val_loss);

        const double metric = cfg.checkpoint_metric == CheckpointMetric::kValidationLoss
                                  ? val_loss
                                  : train_loss;
        if (std::isfinite(metric) && metric < best_metric) {
            best_metric = metric;
            res.best = net;
            best_epoch = epoch;
        }

        if (!std::isfinite(train_loss)) {
            res.converged = false;
            break;
        }
        if (epoch == 1) {
            first_loss = train_loss;
        } else if (first_loss > 0.0 && train_loss > 1e6 * first_loss) {
            blowup_streak += 1;
            if (blowup_streak >= cfg.divergence_patience) {
                res.converged = false;
                break;
            }
        } else {
            blowup_streak = 0;
        }
    }

    res.history.best_epoch = best_epoch;
    if (best_epoch == 0) {
        // no epoch produced a finite checkpoint metric
        res.converged = false;
        res.best = initial;
    } else if (res.converged && parameters_identical(net, initial)) {
        // The loss had zero gradient from the start (with MSLE this happens
        // when every initial prediction is negative), so no optimizer moved
        // a single parameter. The run trained nothing and must not pass as
        // a fitted model.
        res.converged = false;
    }
    res.history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::string history_to_csv(const TrainingHistory& h) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t i = 0; i < h.train_loss.size(); ++i) {
        out << (i + 1) << ',' << format_double(h.train_loss[i]) << ','
            << format_double(h.val_loss[i]) << '\n';
    }
    return out.str();
}

} // namespace fatigue

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fatigue/matrix.hpp"
#include "fatigue/network.hpp"

namespace fatigue {

enum class LossKind { kMSE, kMSLE };
enum class OptimizerKind { kAdam, kNadam, kRMSprop };

LossKind loss_from_string(const std::string& name);
std::string to_string(LossKind k);
OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind k);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::kRMSprop;
    double learning_rate = 0.001;
    double beta1 = 0.9;   // Adam/Nadam first-moment decay
    double beta2 = 0.999; // Adam/Nadam second-moment decay
    double rho = 0.9;     // RMSprop decay
    double epsilon = 1e-7;

    void validate() const;
};

/// Moment accumulators mirroring the network parameters. t counts applied
/// updates; the first update sees t = 1.
struct OptimizerState {
    std::vector<Matrix> m_w;
    std::vector<std::vector<double>> m_b;
    std::vector<Matrix> v_w;
    std::vector<std::vector<double>> v_b;
    std::uint64_t t = 0;
    double beta1_pow = 1.0;
    double beta2_pow = 1.0;

    static OptimizerState for_network(const Network& net, OptimizerKind kind);
};

enum class CheckpointMetric { kValidationLoss, kTrainingLoss };

struct TrainConfig {
    LossKind loss = LossKind::kMSLE;
    OptimizerConfig optimizer;
    std::size_t epochs = 300000;
    std::size_t batch_size = 32; // clamped to the training-set size
    CheckpointMetric checkpoint_metric = CheckpointMetric::kValidationLoss;
    std::size_t divergence_patience = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainingHistory {
    std::vector<double> train_loss; // one entry per completed epoch
    std::vector<double> val_loss;   // NaN when no validation split given
    std::size_t best_epoch = 0;     // 1-based; 0 = no finite metric seen
    double wall_seconds = 0.0;
};

struct Gradients {
    std::vector<Matrix> w;
    std::vector<std::vector<double>> b;

    static Gradients zeros_like(const Network& net);
};

/// MSE = (1/n) sum (y - yhat)^2.
/// MSLE = (1/n) sum (log(y+1) - log(max(yhat,0)+1))^2, natural log.
double compute_loss(LossKind kind, std::span<const double> y_true,
                    std::span<const double> y_pred);

/// dL/dyhat_i. MSLE's clamp passes no gradient when yhat < 0.
std::vector<double> loss_gradient(LossKind kind, std::span<const double> y_true,
                                  std::span<const double> y_pred);

/// Gradients of the batch loss for every weight and bias. X rows are samples.
/// Throws NumericError("gradient overflow") on non-finite gradients.
Gradients backprop(const Network& net, const Matrix& X, std::span<const double> y,
                   LossKind kind);

/// One update of every parameter; increments state.t by exactly one.
void optimizer_step(const OptimizerConfig& cfg, OptimizerState& state, Network& net,
                    const Gradients& grads);

struct TrainResult {
    Network best;
    TrainingHistory history;
    bool converged = true;
};

/// Mini-batch training loop with per-epoch seeded shuffling and lowest-loss
/// checkpointing. X matrices: rows = samples, cols = features (pre-scaled).
/// Divergence (non-finite epoch loss, or a 1e6x blowup over the first-epoch
/// loss lasting divergence_patience epochs) aborts the loop and flags the
/// result non-converged instead of throwing.
TrainResult train(const Network& initial, const Matrix& X_train,
                  std::span<const double> y_train, const Matrix& X_val,
                  std::span<const double> y_val, const TrainConfig& cfg);

/// History as CSV: header "epoch,train_loss,val_loss", one row per epoch.
std::string history_to_csv(const TrainingHistory& h);

} // namespace fatigue

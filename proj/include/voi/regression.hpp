#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "voi/design.hpp"
#include "voi/loss.hpp"
#include "voi/rng.hpp"

namespace voi {

enum class OutputActivation { Identity, LogitInverse };

// Adadelta's full configuration surface: decay and conditioner. The method
// derives its step size from running RMS statistics, so there is no learning
// rate to set.
struct AdadeltaConfig {
  double rho = 0.95;
  double epsilon = 1e-6;
};

// One Adadelta parameter step; returns the applied delta. The array form is
// what training uses, the scalar form pins the update rule in tests.
double adadelta_step_scalar(double grad, double& acc_grad_sq, double& acc_delta_sq,
                            const AdadeltaConfig& config);
void adadelta_update(const Eigen::ArrayXXd& grad, Eigen::ArrayXXd& acc_grad_sq,
                     Eigen::ArrayXXd& acc_delta_sq, Eigen::ArrayXXd& params,
                     const AdadeltaConfig& config);

// Fully connected network: sigmoid hidden layers, configurable output
// activation, trained by mini-batch gradient descent with Adadelta updates
// and inverted dropout on hidden nodes (training only).
struct MlpSpec {
  std::vector<int> hidden_nodes = {100, 100};  // one entry per hidden layer
  double dropout = 0.5;                        // in [0, 1)
  OutputActivation output_activation = OutputActivation::Identity;
  AdadeltaConfig adadelta;
  int epochs = 200;
  int batch_size = 128;
  int patience = 20;                 // early stop after this many flat validation epochs
  double validation_fraction = 0.1;  // carved from the training rows
  std::uint64_t seed = 0;

  void validate() const;
  std::string describe() const;
};

struct FittedRegressor {
  enum class Kind { Linear, Mlp };

  Kind kind = Kind::Linear;
  std::string description = "linear";

  // predictor schema (names + standardization constants)
  std::vector<std::string> columns;
  Eigen::VectorXd column_mean;
  Eigen::VectorXd column_scale;

  // linear: intercept followed by one weight per standardized column
  Eigen::VectorXd linear_weights;

  // mlp: per layer weights (in x out) and biases; output layer last
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  OutputActivation output_activation = OutputActivation::Identity;

  // response standardization (identity-output quadratic training only)
  double response_mean = 0.0;
  double response_scale = 1.0;

  std::vector<double> loss_trace;  // per-epoch training loss
};

// Least squares on standardized predictors; minimal-norm solution when the
// design is rank deficient (complete orthogonal decomposition).
FittedRegressor fit_linear(const DesignMatrix& train, const Eigen::VectorXd& response);

FittedRegressor fit_mlp(const DesignMatrix& train, const Eigen::VectorXd& response,
                        const MlpSpec& spec, const LossSpec& loss = LossSpec::quadratic());

// Deterministic predictions on raw (unstandardized) rows; dropout off.
Eigen::VectorXd predict(const FittedRegressor& model, const Eigen::MatrixXd& raw_rows);

// Schema-checked variant: column names must match the training schema.
Eigen::VectorXd predict_checked(const FittedRegressor& model, const Eigen::MatrixXd& raw_rows,
                                const std::vector<std::string>& columns);

struct RegressorScore {
  std::string description;
  double held_out_loss = 0.0;
  bool selected = false;
};

// Minimal mean held-out loss wins; ties break toward the earlier candidate.
struct SelectionResult {
  int best_index = -1;
  std::vector<RegressorScore> scores;
};

SelectionResult select_regressor(const std::vector<FittedRegressor>& candidates,
                                 const Eigen::MatrixXd& test_raw_rows,
                                 const Eigen::VectorXd& test_response,
                                 const LossSpec& loss = LossSpec::quadratic());

// Versioned audit format (JSON text).
void save_regressor(const FittedRegressor& model, const std::string& path);
FittedRegressor load_regressor(const std::string& path);

// Full-batch loss and gradient without dropout, parameters flattened; used
// by finite-difference verification.
double mlp_loss_flat(const Eigen::VectorXd& flat_params, const std::vector<int>& hidden_nodes,
                     OutputActivation activation, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, const LossSpec& loss);
Eigen::VectorXd mlp_grad_flat(const Eigen::VectorXd& flat_params,
                              const std::vector<int>& hidden_nodes, OutputActivation activation,
                              const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const LossSpec& loss);
int mlp_param_count(int input_dim, const std::vector<int>& hidden_nodes);

}  // namespace voi

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voi/loss.hpp"
#include "voi/model.hpp"
#include "voi/regression.hpp"
#include "voi/sampler.hpp"

namespace voi {

// Estimate with its Monte Carlo standard error.
struct VoiValue {
  double value = 0.0;
  double mc_error = 0.0;
};

// Candidate grid and budgets for regression-based PVSI estimation. The grid
// defaults to 1-3 hidden layers, 50/100 nodes and dropout .3/.5/.7;
// configurations shrink it for cheap runs.
struct RegressionConfig {
  std::vector<int> layer_options = {1, 2, 3};
  std::vector<int> node_options = {50, 100};
  std::vector<double> dropout_options = {0.3, 0.5, 0.7};
  bool include_linear = true;
  OutputActivation output_activation = OutputActivation::Identity;
  AdadeltaConfig adadelta;
  int epochs = 200;
  int batch_size = 128;
  int patience = 20;
  double train_fraction = 0.8;
  int max_draws = 4000;  // chain draws used for simulation/regression
  int workers = 1;
  std::uint64_t seed = 0;

  std::vector<MlpSpec> mlp_grid() const;
};

// Per-component regression diagnostics kept alongside a PVSI estimate; the
// fitted regressors feed the surprise probability without refitting.
struct PvsiComponentDiagnostics {
  std::string component;
  std::vector<RegressorScore> scores;
  std::string selected;
  double heldout_loss_selected = 0.0;
  double response_variance = 0.0;      // variance of the regression response
  double raw_target_variance = 0.0;    // variance of the raw target draws
  FittedRegressor regressor;
};

struct PvsiEstimate {
  double value = 0.0;
  double mc_error = 0.0;
  int draws_used = 0;
  std::vector<PvsiComponentDiagnostics> components;
  Eigen::MatrixXd raw_design;         // simulated predictor rows (draws x cells)
  std::vector<std::string> columns;
  Eigen::VectorXd anchor;             // E[target | conditioning data]
};

// Squared distance between the two chains' target means (quadratic-loss
// RVSI); vector targets sum componentwise. Chains must come from the same
// dataset universe.
VoiValue rvsi_quadratic(const PosteriorChain& chain_full, const PosteriorChain& chain_reduced,
                        const TargetSpec& target);

struct NestedMcConfig {
  int outer_draws = 200;
  SamplerConfig outer;
  SamplerConfig inner;
  double budget = 1e7;  // ceiling on likelihood evaluations
  bool override_budget = false;
  std::uint64_t seed = 0;
};

// Reference oracle: an inner chain per simulated Y_new. Deliberately the
// expensive baseline; refuses to exceed its budget unless overridden.
VoiValue pvsi_nested_mc(const Model& model, const Dataset& data_reduced,
                        std::span<const DataRow> pattern, const TargetSpec& target,
                        const NestedMcConfig& config);

// Regression-based PVSI after the quadratic-loss scheme: simulate Y_new per
// draw, regress the target draws on the simulated observations
// (Kennard-Stone split, held-out selection), average squared predicted
// shifts over all draws.
PvsiEstimate pvsi_regression(const PosteriorChain& chain_reduced, const Model& model,
                             const Dataset& data_reduced, std::span<const DataRow> pattern,
                             const TargetSpec& target, const RegressionConfig& config);

// Rao-Blackwellized variant: the response is the closed-form conditional
// mean of the target given the draw's nuisance blocks and Y_old + Y_new.
PvsiEstimate pvsi_rao_blackwell(const PosteriorChain& chain_reduced, const Model& model,
                                const Dataset& data_reduced, std::span<const DataRow> pattern,
                                const TargetSpec& target, const RegressionConfig& config);

enum class DecisionEstimatorKind { ConstantOnly, Linear, Mlp };

struct GenericPvsiConfig {
  RegressionConfig regression;
  std::vector<DecisionEstimatorKind> estimators = {DecisionEstimatorKind::Linear,
                                                   DecisionEstimatorKind::Mlp};
};

// Generic-loss PVSI: fit a decision estimator minimizing the custom loss on
// a training split, then average L(a0, theta) - L(a_hat(Y_new), theta) over
// draws. Scalar targets only (component losses of vector targets do not
// decouple under arbitrary losses).
PvsiEstimate pvsi_generic(const PosteriorChain& chain_reduced, const Model& model,
                          const Dataset& data_reduced, std::span<const DataRow> pattern,
                          const TargetSpec& target, const LossSpec& loss,
                          const GenericPvsiConfig& config);

struct Evoir {
  double value = 0.0;
  bool defined = false;
};

// RVSI / PVSI; undefined when PVSI sits below the floor (1e-8 x the target's
// posterior variance) where the ratio would be noise.
Evoir evoir(double rvsi, double pvsi, double target_posterior_variance,
            double floor_factor = 1e-8);

// Fraction of simulated draws whose predicted squared decision shift exceeds
// the observed RVSI, using the regressors fitted for the PVSI estimate.
double surprise_probability(const PvsiEstimate& estimate, double observed_rvsi);

// Four-case influence taxonomy per the RVSI/EVOIR framing, plus a separate
// label when EVOIR is undefined.
struct TaxonomyThresholds {
  double rvsi_quantile = 0.75;  // batch quantile separating high/low RVSI
  double evoir_high = 1.5;      // EVOIR cutoff for "surprising"
};

struct TaxonomyCase {
  int case_number = 0;  // 1..4, or 0 when EVOIR undefined
  std::string label;
  std::string interpretation;
};

TaxonomyCase classify_taxonomy(double rvsi, const Evoir& evoir_value, double rvsi_cutoff,
                               const TaxonomyThresholds& thresholds);
double rvsi_batch_cutoff(std::span<const double> batch_rvsi, const TaxonomyThresholds& thresholds);

// PVSI of hypothetical future cells conditioning on all observed data; used
// to rank candidate designs. Design error when the pattern overlaps observed
// cells.
PvsiEstimate prospective_design_value(const PosteriorChain& chain_full, const Model& model,
                                      const Dataset& data_observed,
                                      std::span<const DataRow> design_pattern,
                                      const TargetSpec& target, const RegressionConfig& config);

// Pattern helpers around partitions: checks chain provenance against the
// partition complement before delegating to the pattern-based estimators.
PvsiEstimate pvsi_regression_partition(const PosteriorChain& chain_reduced, const Model& model,
                                       const Dataset& data_full, const DataPartition& partition,
                                       const TargetSpec& target, const RegressionConfig& config);
PvsiEstimate pvsi_rao_blackwell_partition(const PosteriorChain& chain_reduced, const Model& model,
                                          const Dataset& data_full, const DataPartition& partition,
                                          const TargetSpec& target,
                                          const RegressionConfig& config);

// One row of a VOI report: per (partition, target).
struct VoiResult {
  std::string partition_label;
  std::string target_name;
  double rvsi = 0.0;
  double rvsi_mc_error = 0.0;
  double pvsi = 0.0;
  double pvsi_mc_error = 0.0;
  Evoir evoir_value;
  double surprise = 0.0;
  TaxonomyCase taxonomy;
  std::string selected_regressor;
  double heldout_loss = 0.0;
};

}  // namespace voi

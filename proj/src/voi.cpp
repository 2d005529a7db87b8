#include "voi/voi.hpp"

#include <algorithm>
#include <cmath>

#include "voi/errors.hpp"
#include "voi/parallel.hpp"
#include "voi/special_functions.hpp"

namespace voi {

namespace {

std::vector<int> spaced_indices(int available, int wanted) {
  wanted = std::min(available, std::max(1, wanted));
  std::vector<int> idx(static_cast<std::size_t>(wanted));
  for (int i = 0; i < wanted; ++i) {
    idx[static_cast<std::size_t>(i)] =
        static_cast<int>(static_cast<long>(i) * available / wanted);
  }
  return idx;
}

Eigen::VectorXd sample_variance_cols(const Eigen::MatrixXd& m) {
  const Eigen::RowVectorXd mean = m.colwise().mean();
  const int n = static_cast<int>(m.rows());
  if (n < 2) return Eigen::VectorXd::Zero(m.cols());
  return (m.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(n - 1);
}

}  // namespace

std::vector<MlpSpec> RegressionConfig::mlp_grid() const {
  std::vector<MlpSpec> grid;
  for (int layers : layer_options) {
    for (int nodes : node_options) {
      for (double rate : dropout_options) {
        MlpSpec spec;
        spec.hidden_nodes.assign(static_cast<std::size_t>(layers), nodes);
        spec.dropout = rate;
        spec.output_activation = output_activation;
        spec.adadelta = adadelta;
        spec.epochs = epochs;
        spec.batch_size = batch_size;
        spec.patience = patience;
        grid.push_back(std::move(spec));
      }
    }
  }
  return grid;
}

VoiValue rvsi_quadratic(const PosteriorChain& chain_full, const PosteriorChain& chain_reduced,
                        const TargetSpec& target) {
  if (chain_full.empty() || chain_reduced.empty()) {
    throw_error(ErrorKind::Usage, "rvsi: empty chain");
  }
  if (chain_full.provenance().dataset_hash != chain_reduced.provenance().dataset_hash) {
    throw_error(ErrorKind::Usage,
                "rvsi: chains come from different datasets (provenance mismatch)");
  }
  const Eigen::VectorXd mean_full = chain_mean(chain_full, target);
  const Eigen::VectorXd mean_reduced = chain_mean(chain_reduced, target);
  const Eigen::VectorXd shift = mean_full - mean_reduced;
  const Eigen::VectorXd se_full = chain_mc_error(chain_full, target);
  const Eigen::VectorXd se_reduced = chain_mc_error(chain_reduced, target);

  VoiValue out;
  out.value = shift.squaredNorm();
  double var = 0.0;
  for (int k = 0; k < shift.size(); ++k) {
    const double v = se_full[k] * se_full[k] + se_reduced[k] * se_reduced[k];
    // delta method plus the second-order term that dominates near zero shift
    var += 4.0 * shift[k] * shift[k] * v + 2.0 * v * v;
  }
  out.mc_error = std::sqrt(var);
  return out;
}

VoiValue pvsi_nested_mc(const Model& model, const Dataset& data_reduced,
                        std::span<const DataRow> pattern, const TargetSpec& target,
                        const NestedMcConfig& config) {
  const int coords = model.bind(data_reduced)->layout()->total_size();
  const double cost =
      (static_cast<double>(config.outer.iterations) +
       static_cast<double>(config.outer_draws) * static_cast<double>(config.inner.iterations)) *
      std::max(1, coords);
  if (cost > config.budget && !config.override_budget) {
    throw_error(ErrorKind::Budget,
                "nested MC would need ~" + std::to_string(cost) +
                    " likelihood evaluations, over the budget of " +
                    std::to_string(config.budget) + " (set the override to force it)");
  }

  SamplerConfig outer_cfg = config.outer;
  outer_cfg.seed = splitmix64(config.seed ^ fnv1a64("nested-outer"));
  const PosteriorChain outer = sample_posterior(model, data_reduced, outer_cfg, "nested-outer");
  const Eigen::VectorXd anchor = chain_mean(outer, target);

  const std::vector<int> idx = spaced_indices(outer.size(), config.outer_draws);
  double sum = 0.0, sumsq = 0.0;
  ParameterState buffer = ParameterState::zeros(outer.layout());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    buffer.flat() = outer.draws()[static_cast<std::size_t>(idx[i])];
    RngStream sim_rng = RngStream::derive(config.seed, "nested-sim:" + std::to_string(i));
    const std::vector<DataRow> simulated = model.simulate_predictive(buffer, pattern, sim_rng);
    Dataset data_full = data_reduced;
    for (const DataRow& row : simulated) data_full.add_row(row);
    data_full.validate_unique_keys();

    SamplerConfig inner_cfg = config.inner;
    inner_cfg.seed = splitmix64(config.seed ^ fnv1a64("nested-inner:" + std::to_string(i)));
    const PosteriorChain inner = sample_posterior(model, data_full, inner_cfg, "nested-inner");
    const double s = (chain_mean(inner, target) - anchor).squaredNorm();
    sum += s;
    sumsq += s * s;
  }
  const double n = static_cast<double>(idx.size());
  VoiValue out;
  out.value = sum / n;
  out.mc_error = n > 1 ? std::sqrt((sumsq / n - out.value * out.value) / n) : 0.0;
  return out;
}

namespace {

// Shared engine for the regression-based estimators: simulates the pattern
// at thinned chain draws, builds the design, fits the candidate grid per
// target component on a Kennard-Stone training split, selects by held-out
// loss, and averages squared predicted shifts over all draws.
struct RegressionEngineInput {
  const PosteriorChain& chain;
  const Model& model;
  const Dataset& data_reduced;
  std::span<const DataRow> pattern;
  const TargetSpec& target;
  const RegressionConfig& config;
  // response per (draw, state, simulated data); defaults to the raw target
  std::function<Eigen::VectorXd(const ParameterState&, const Dataset&)> response;
  std::string response_label;
};

PvsiEstimate run_regression_engine(const RegressionEngineInput& in) {
  if (in.chain.empty()) throw_error(ErrorKind::Usage, "pvsi: empty chain");
  PvsiEstimate out;
  out.anchor = chain_mean(in.chain, in.target);

  if (in.pattern.empty()) {
    // no cells to observe: no decision can move
    out.value = 0.0;
    out.draws_used = 0;
    return out;
  }

  std::vector<std::string> columns;
  for (const DataRow& cell : in.pattern) in.model.design_columns(cell, columns);

  const std::vector<int> idx = spaced_indices(in.chain.size(), in.config.max_draws);
  const int n = static_cast<int>(idx.size());
  const int arity = in.target.arity();
  Eigen::MatrixXd raw(n, static_cast<int>(columns.size()));
  Eigen::MatrixXd responses(n, arity);
  Eigen::MatrixXd raw_target(n, arity);

  ParameterState buffer = ParameterState::zeros(in.chain.layout());
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    buffer.flat() = in.chain.draws()[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    RngStream sim_rng = RngStream::derive(in.config.seed, "pvsi-sim:" + std::to_string(i));
    const std::vector<DataRow> simulated =
        in.model.simulate_predictive(buffer, in.pattern, sim_rng);
    values.clear();
    for (const DataRow& row : simulated) in.model.design_values(row, values);
    if (static_cast<int>(values.size()) != raw.cols()) {
      throw_error(ErrorKind::Usage, "design values do not match design columns");
    }
    for (int j = 0; j < raw.cols(); ++j) raw(i, j) = values[static_cast<std::size_t>(j)];

    raw_target.row(i) = eval_target(buffer, in.target).transpose();
    if (in.response) {
      Dataset data_full = in.data_reduced;
      for (const DataRow& row : simulated) data_full.add_row(row);
      responses.row(i) = in.response(buffer, data_full).transpose();
    } else {
      responses.row(i) = raw_target.row(i);
    }
  }

  const DesignMatrix design = DesignMatrix::standardized(raw, columns);
  const auto [train_idx, test_idx] = kennard_stone_split(design.rows(), in.config.train_fraction);
  if (test_idx.empty()) {
    throw_error(ErrorKind::Config, "pvsi: train fraction leaves no held-out rows");
  }
  const DesignMatrix train = design.select_rows(train_idx);
  Eigen::MatrixXd raw_test(static_cast<long>(test_idx.size()), raw.cols());
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    raw_test.row(static_cast<long>(i)) = raw.row(test_idx[i]);
  }

  const std::vector<MlpSpec> grid = in.config.mlp_grid();
  const Eigen::VectorXd resp_var = sample_variance_cols(responses);
  const Eigen::VectorXd raw_var = sample_variance_cols(raw_target);

  Eigen::MatrixXd predicted(n, arity);
  for (int k = 0; k < arity; ++k) {
    Eigen::VectorXd y_train(static_cast<long>(train_idx.size()));
    for (std::size_t i = 0; i < train_idx.size(); ++i) y_train[static_cast<long>(i)] = responses(train_idx[i], k);
    Eigen::VectorXd y_test(static_cast<long>(test_idx.size()));
    for (std::size_t i = 0; i < test_idx.size(); ++i) y_test[static_cast<long>(i)] = responses(test_idx[i], k);

    std::vector<FittedRegressor> candidates(grid.size() + (in.config.include_linear ? 1 : 0));
    int offset = 0;
    if (in.config.include_linear) {
      candidates[0] = fit_linear(train, y_train);
      offset = 1;
    }
    parallel_for(static_cast<int>(grid.size()), in.config.workers, [&](int g) {
      MlpSpec spec = grid[static_cast<std::size_t>(g)];
      spec.seed = splitmix64(in.config.seed ^
                             fnv1a64("cand:" + spec.describe() + ":" + std::to_string(k)));
      candidates[static_cast<std::size_t>(g + offset)] = fit_mlp(train, y_train, spec);
    });

    const SelectionResult selection = select_regressor(candidates, raw_test, y_test);
    const FittedRegressor& best = candidates[static_cast<std::size_t>(selection.best_index)];
    predicted.col(k) = predict(best, raw);

    PvsiComponentDiagnostics diag;
    diag.component = in.target.components[static_cast<std::size_t>(k)];
    diag.scores = selection.scores;
    diag.selected = best.description;
    diag.heldout_loss_selected =
        selection.scores[static_cast<std::size_t>(selection.best_index)].held_out_loss;
    diag.response_variance = resp_var[k];
    diag.raw_target_variance = raw_var[k];
    diag.regressor = best;
    out.components.push_back(std::move(diag));
  }

  // average of squared predicted shifts over every draw
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = (predicted.row(i).transpose() - out.anchor).squaredNorm();
    sum += s;
    sumsq += s * s;
  }
  out.value = sum / n;
  out.mc_error = n > 1 ? std::sqrt((sumsq / n - out.value * out.value) / n) : 0.0;
  out.draws_used = n;
  out.raw_design = std::move(raw);
  out.columns = columns;
  return out;
}

}  // namespace

PvsiEstimate pvsi_regression(const PosteriorChain& chain_reduced, const Model& model,
                             const Dataset& data_reduced, std::span<const DataRow> pattern,
                             const TargetSpec& target, const RegressionConfig& config) {
  RegressionEngineInput in{chain_reduced, model, data_reduced, pattern, target, config, {}, "raw"};
  return run_regression_engine(in);
}

PvsiEstimate pvsi_rao_blackwell(const PosteriorChain& chain_reduced, const Model& model,
                                const Dataset& data_reduced, std::span<const DataRow> pattern,
                                const TargetSpec& target, const RegressionConfig& config) {
  if (!model.supports_conditional_mean(target)) {
    throw_error(ErrorKind::Capability,
                "model '" + model.name() + "' has no closed-form conditional mean for target '" +
                    target.name + "'; use pvsi_regression instead");
  }
  RegressionEngineInput in{chain_reduced, model,  data_reduced,
                           pattern,       target, config,
                           [&](const ParameterState& state, const Dataset& data) {
                             return model.conditional_mean_target(state, data, target);
                           },
                           "rao-blackwell"};
  return run_regression_engine(in);
}

namespace {

// Constant action minimizing the average loss over draws: coordinate descent
// with golden-section line search (exact mean under quadratic loss).
Eigen::VectorXd minimize_constant_action(const Eigen::MatrixXd& truths, const LossSpec& loss) {
  const int arity = static_cast<int>(truths.cols());
  Eigen::VectorXd action = truths.colwise().mean();
  if (loss.kind == LossSpec::Kind::Quadratic) return action;

  auto objective = [&](const Eigen::VectorXd& a) {
    double acc = 0.0;
    for (int i = 0; i < truths.rows(); ++i) acc += loss(a, truths.row(i).transpose());
    return acc / static_cast<double>(truths.rows());
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int sweep = 0; sweep < 8; ++sweep) {
    for (int k = 0; k < arity; ++k) {
      double lo = truths.col(k).minCoeff();
      double hi = truths.col(k).maxCoeff();
      if (!(hi > lo)) continue;
      Eigen::VectorXd probe = action;
      double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
      probe[k] = x1;
      double f1 = objective(probe);
      probe[k] = x2;
      double f2 = objective(probe);
      for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi * (hi - lo);
          probe[k] = x1;
          f1 = objective(probe);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi * (hi - lo);
          probe[k] = x2;
          f2 = objective(probe);
        }
      }
      action[k] = 0.5 * (lo + hi);
    }
  }
  return action;
}

}  // namespace

PvsiEstimate pvsi_generic(const PosteriorChain& chain_reduced, const Model& model,
                          const Dataset& data_reduced, std::span<const DataRow> pattern,
                          const TargetSpec& target, const LossSpec& loss,
                          const GenericPvsiConfig& config) {
  if (target.arity() != 1) {
    throw_error(ErrorKind::Config,
                "pvsi_generic handles scalar targets; vector losses do not decompose for "
                "arbitrary loss functions");
  }
  if (config.estimators.empty()) {
    throw_error(ErrorKind::Config, "pvsi_generic: no decision estimator families configured");
  }
  if (chain_reduced.empty()) throw_error(ErrorKind::Usage, "pvsi: empty chain");

  PvsiEstimate out;
  out.anchor = chain_mean(chain_reduced, target);
  if (pattern.empty()) return out;

  std::vector<std::string> columns;
  for (const DataRow& cell : pattern) model.design_columns(cell, columns);
  const std::vector<int> idx = spaced_indices(chain_reduced.size(), config.regression.max_draws);
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd raw(n, static_cast<int>(columns.size()));
  Eigen::MatrixXd truths(n, 1);
  ParameterState buffer = ParameterState::zeros(chain_reduced.layout());
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    buffer.flat() = chain_reduced.draws()[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    RngStream sim_rng = RngStream::derive(config.regression.seed, "pvsi-sim:" + std::to_string(i));
    const std::vector<DataRow> simulated = model.simulate_predictive(buffer, pattern, sim_rng);
    values.clear();
    for (const DataRow& row : simulated) model.design_values(row, values);
    for (int j = 0; j < raw.cols(); ++j) raw(i, j) = values[static_cast<std::size_t>(j)];
    truths.row(i) = eval_target(buffer, target).transpose();
  }

  const Eigen::VectorXd a0 = minimize_constant_action(truths, loss);

  const DesignMatrix design = DesignMatrix::standardized(raw, columns);
  const auto [train_idx, test_idx] =
      kennard_stone_split(design.rows(), config.regression.train_fraction);
  const DesignMatrix train = design.select_rows(train_idx);
  Eigen::VectorXd y_train(static_cast<long>(train_idx.size()));
  for (std::size_t i = 0; i < train_idx.size(); ++i) y_train[static_cast<long>(i)] = truths(train_idx[i], 0);
  Eigen::MatrixXd raw_test(static_cast<long>(test_idx.size()), raw.cols());
  Eigen::VectorXd y_test(static_cast<long>(test_idx.size()));
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    raw_test.row(static_cast<long>(i)) = raw.row(test_idx[i]);
    y_test[static_cast<long>(i)] = truths(test_idx[i], 0);
  }

  std::vector<FittedRegressor> candidates;
  for (DecisionEstimatorKind kind : config.estimators) {
    switch (kind) {
      case DecisionEstimatorKind::ConstantOnly: {
        // the single-action decision space: always answer a0
        FittedRegressor constant;
        constant.kind = FittedRegressor::Kind::Linear;
        constant.description = "constant";
        constant.columns = columns;
        constant.column_mean = design.column_mean();
        constant.column_scale = design.column_scale();
        constant.linear_weights = Eigen::VectorXd::Zero(raw.cols() + 1);
        constant.linear_weights[0] = a0[0];
        candidates.push_back(std::move(constant));
        break;
      }
      case DecisionEstimatorKind::Linear:
        candidates.push_back(fit_linear(train, y_train));
        break;
      case DecisionEstimatorKind::Mlp: {
        for (MlpSpec spec : config.regression.mlp_grid()) {
          spec.seed = splitmix64(config.regression.seed ^ fnv1a64("gen:" + spec.describe()));
          candidates.push_back(fit_mlp(train, y_train, spec, loss));
        }
        break;
      }
    }
  }

  const SelectionResult selection = select_regressor(candidates, raw_test, y_test, loss);
  const FittedRegressor& best = candidates[static_cast<std::size_t>(selection.best_index)];
  const Eigen::VectorXd decisions = predict(best, raw);

  double sum = 0.0, sumsq = 0.0;
  Eigen::VectorXd a(1), t(1);
  for (int i = 0; i < n; ++i) {
    a[0] = decisions[i];
    t[0] = truths(i, 0);
    const double gain = loss(a0, t) - loss(a, t);
    sum += gain;
    sumsq += gain * gain;
  }
  out.value = sum / n;
  out.mc_error = n > 1 ? std::sqrt((sumsq / n - out.value * out.value) / n) : 0.0;
  out.draws_used = n;

  PvsiComponentDiagnostics diag;
  diag.component = target.components[0];
  diag.scores = selection.scores;
  diag.selected = best.description;
  diag.heldout_loss_selected =
      selection.scores[static_cast<std::size_t>(selection.best_index)].held_out_loss;
  diag.response_variance = sample_variance_cols(truths)[0];
  diag.raw_target_variance = diag.response_variance;
  diag.regressor = best;
  out.components.push_back(std::move(diag));
  out.raw_design = std::move(raw);
  out.columns = columns;
  return out;
}

Evoir evoir(double rvsi, double pvsi, double target_posterior_variance, double floor_factor) {
  Evoir out;
  const double floor = std::max(floor_factor * target_posterior_variance, 1e-300);
  if (!(pvsi > floor)) {
    out.defined = false;
    return out;
  }
  out.value = rvsi / pvsi;
  out.defined = true;
  return out;
}

double surprise_probability(const PvsiEstimate& estimate, double observed_rvsi) {
  if (estimate.components.empty() || estimate.raw_design.rows() == 0) {
    throw_error(ErrorKind::Usage, "surprise probability needs a fitted PVSI estimate");
  }
  const int n = static_cast<int>(estimate.raw_design.rows());
  const int arity = static_cast<int>(estimate.components.size());
  Eigen::MatrixXd predicted(n, arity);
  for (int k = 0; k < arity; ++k) {
    predicted.col(k) = predict(estimate.components[static_cast<std::size_t>(k)].regressor,
                               estimate.raw_design);
  }
  int exceed = 0;
  for (int i = 0; i < n; ++i) {
    const double s = (predicted.row(i).transpose() - estimate.anchor).squaredNorm();
    if (s > observed_rvsi) exceed += 1;
  }
  return static_cast<double>(exceed) / static_cast<double>(n);
}

double rvsi_batch_cutoff(std::span<const double> batch_rvsi,
                         const TaxonomyThresholds& thresholds) {
  if (batch_rvsi.empty()) throw_error(ErrorKind::Usage, "taxonomy: empty RVSI batch");
  std::vector<double> sorted(batch_rvsi.begin(), batch_rvsi.end());
  std::sort(sorted.begin(), sorted.end());
  const double q = std::clamp(thresholds.rvsi_quantile, 0.0, 1.0);
  const std::size_t pos = std::min(
      sorted.size() - 1, static_cast<std::size_t>(q * static_cast<double>(sorted.size())));
  return sorted[pos];
}

TaxonomyCase classify_taxonomy(double rvsi, const Evoir& evoir_value, double rvsi_cutoff,
                               const TaxonomyThresholds& thresholds) {
  TaxonomyCase out;
  if (!evoir_value.defined) {
    out.case_number = 0;
    out.label = "insufficient-prospective-value";
    out.interpretation =
        "Prospective value is too small to form a meaningful influence ratio; the data pattern "
        "cannot move this target.";
    return out;
  }
  const bool high_rvsi = rvsi >= rvsi_cutoff;
  const bool high_evoir = evoir_value.value >= thresholds.evoir_high;
  if (!high_rvsi && !high_evoir) {
    out.case_number = 1;
    out.label = "quiet";
    out.interpretation =
        "Removing this portion leaves the decision nearly unchanged. Worth attention only if "
        "many portions score this low, which can point to an overly conservative model.";
  } else if (high_rvsi && !high_evoir) {
    out.case_number = 2;
    out.label = "expected-influence";
    out.interpretation =
        "Large influence that the structure of the data already predicted (sample sizes, "
        "coverage). Consider splitting this portion further to localize the effect.";
  } else if (!high_rvsi && high_evoir) {
    out.case_number = 3;
    out.label = "surprising-only";
    out.interpretation =
        "Influence is weak but larger than the rest of the data predicts. Check for recording "
        "errors and for assumptions this portion may violate.";
  } else {
    out.case_number = 4;
    out.label = "most-worrisome";
    out.interpretation =
        "Surprising and influential: conclusions rest on data at odds with the rest. "
        "Investigate before trusting downstream estimates.";
  }
  return out;
}

namespace {

void check_partition_provenance(const PosteriorChain& chain_reduced, const Dataset& data_full,
                                const DataPartition& partition) {
  if (chain_reduced.provenance().dataset_hash != data_full.content_hash()) {
    throw_error(ErrorKind::Usage, "pvsi: chain was fit against a different dataset");
  }
  if (chain_reduced.provenance().conditioned_rows_hash !=
      data_full.rows_hash(partition.complement)) {
    throw_error(ErrorKind::Usage,
                "pvsi: chain is not conditioned on the complement of partition '" +
                    partition.label + "'");
  }
}

}  // namespace

PvsiEstimate pvsi_regression_partition(const PosteriorChain& chain_reduced, const Model& model,
                                       const Dataset& data_full, const DataPartition& partition,
                                       const TargetSpec& target, const RegressionConfig& config) {
  check_partition_provenance(chain_reduced, data_full, partition);
  const std::vector<DataRow> pattern = make_pattern(data_full, partition.selected);
  return pvsi_regression(chain_reduced, model, data_full.subset(partition.complement), pattern,
                         target, config);
}

PvsiEstimate pvsi_rao_blackwell_partition(const PosteriorChain& chain_reduced, const Model& model,
                                          const Dataset& data_full, const DataPartition& partition,
                                          const TargetSpec& target,
                                          const RegressionConfig& config) {
  check_partition_provenance(chain_reduced, data_full, partition);
  const std::vector<DataRow> pattern = make_pattern(data_full, partition.selected);
  return pvsi_rao_blackwell(chain_reduced, model, data_full.subset(partition.complement), pattern,
                            target, config);
}

PvsiEstimate prospective_design_value(const PosteriorChain& chain_full, const Model& model,
                                      const Dataset& data_observed,
                                      std::span<const DataRow> design_pattern,
                                      const TargetSpec& target, const RegressionConfig& config) {
  for (const DataRow& cell : design_pattern) {
    for (const DataRow& observed : data_observed.rows()) {
      if (observed.source == cell.source && observed.site == cell.site &&
          observed.year == cell.year) {
        throw_error(ErrorKind::Design, "design cell (" + cell.source + ", site " +
                                           std::to_string(cell.site) + ", year " +
                                           std::to_string(cell.year) +
                                           ") overlaps an observed cell");
      }
    }
  }
  std::vector<int> all(static_cast<std::size_t>(data_observed.size()));
  for (int i = 0; i < data_observed.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  if (chain_full.provenance().conditioned_rows_hash != data_observed.rows_hash(all)) {
    throw_error(ErrorKind::Usage,
                "prospective design value needs the chain conditioned on all observed data");
  }
  if (design_pattern.empty()) {
    PvsiEstimate out;
    out.anchor = chain_mean(chain_full, target);
    return out;
  }
  return pvsi_regression(chain_full, model, data_observed, design_pattern, target, config);
}

}  // namespace voi

#pragma once

#include "voi/model.hpp"

namespace voi {

// N(m0, v0) prior on a mean theta, rows are N(theta, s2) observations
// (value = y). Rows with source "noise" carry standard-normal values
// independent of theta. Conjugate verification oracle.
class NormalNormalModel : public Model {
 public:
  NormalNormalModel(double prior_mean, double prior_var, double obs_var);

  std::string name() const override { return "normal-normal"; }
  std::unique_ptr<BoundModel> bind(const Dataset& data) const override;
  std::vector<DataRow> simulate_predictive(const ParameterState& state,
                                           std::span<const DataRow> pattern,
                                           RngStream& rng) const override;
  ParameterState draw_initial(const Dataset& data, RngStream& rng) const override;
  std::vector<TargetSpec> targets() const override;

  bool supports_conditional_mean(const TargetSpec& target) const override;
  Eigen::VectorXd conditional_mean_target(const ParameterState& state, const Dataset& data,
                                          const TargetSpec& target) const override;

  // Closed-form posterior over theta given the non-noise rows.
  std::pair<double, double> posterior_moments(const Dataset& data) const;  // (mean, var)
  double posterior_variance_for_count(int n_obs) const;

  LayoutPtr layout() const { return layout_; }

 private:
  double m0_;
  double v0_;
  double s2_;
  LayoutPtr layout_;
};

// PVSI under quadratic loss for observing `n_new` additional observations:
// the posterior-variance drop v_old - v_new, exact by conjugacy.
double normal_normal_pvsi_exact(const NormalNormalModel& model, int n_old, int n_new);

}  // namespace voi

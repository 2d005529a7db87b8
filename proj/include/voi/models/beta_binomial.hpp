#pragma once

#include "voi/model.hpp"

namespace voi {

// Beta(a, b) prior on a success probability theta, binomial rows
// (value = successes, trials = draws). Rows with source "noise" carry
// standard-normal values independent of theta. Serves as a conjugate
// verification oracle: the exact posterior and the enumeration PVSI are
// available in closed form.
class BetaBinomialModel : public Model {
 public:
  BetaBinomialModel(double a, double b);

  std::string name() const override { return "beta-binomial"; }
  std::unique_ptr<BoundModel> bind(const Dataset& data) const override;
  std::vector<DataRow> simulate_predictive(const ParameterState& state,
                                           std::span<const DataRow> pattern,
                                           RngStream& rng) const override;
  ParameterState draw_initial(const Dataset& data, RngStream& rng) const override;
  std::vector<TargetSpec> targets() const override;

  bool supports_conditional_mean(const TargetSpec& target) const override;
  Eigen::VectorXd conditional_mean_target(const ParameterState& state, const Dataset& data,
                                          const TargetSpec& target) const override;

  double prior_a() const { return a_; }
  double prior_b() const { return b_; }

  // Posterior Beta(a + sum y, b + sum (n - y)) given the binomial rows.
  std::pair<double, double> posterior_shapes(const Dataset& data) const;
  double posterior_mean(const Dataset& data) const;
  double posterior_variance(const Dataset& data) const;

  LayoutPtr layout() const { return layout_; }

 private:
  double a_;
  double b_;
  LayoutPtr layout_;
};

// Exact PVSI by enumeration over the finite outcome space of the new
// binomial cells (total trial count is sufficient). Budget error when the
// outcome space exceeds `max_outcomes`.
double beta_binomial_pvsi_exact(const BetaBinomialModel& model, const Dataset& data_old,
                                long long new_trials, long long max_outcomes = 2000000);

}  // namespace voi

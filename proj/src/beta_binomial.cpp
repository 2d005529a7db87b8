#include "voi/models/beta_binomial.hpp"

#include <cmath>

#include "voi/errors.hpp"
#include "voi/special_functions.hpp"

namespace voi {

namespace {

bool is_noise_row(const DataRow& r) { return r.source == "noise"; }

void validate_row(const DataRow& r) {
  if (is_noise_row(r)) return;
  if (r.trials < 1.0 || r.trials != std::floor(r.trials)) {
    throw_error(ErrorKind::Data, "beta-binomial row needs integer trials >= 1");
  }
  if (r.value < 0.0 || r.value > r.trials || r.value != std::floor(r.value)) {
    throw_error(ErrorKind::Data, "beta-binomial row needs integer successes in [0, trials]");
  }
}

class BoundBetaBinomial : public BoundModel {
 public:
  BoundBetaBinomial(double a, double b, LayoutPtr layout, const Dataset& data)
      : a_(a), b_(b), layout_(std::move(layout)), data_(data) {
    for (const DataRow& r : data_.rows()) validate_row(r);
  }

  const LayoutPtr& layout() const override { return layout_; }

  LogDensity log_posterior(const ParameterState& state) const override {
    if (!state.layout().same_shape(*layout_)) {
      throw_error(ErrorKind::Schema, "state does not match beta-binomial layout");
    }
    const double theta = state.scalar("theta");
    if (!(theta > 0.0) || !(theta < 1.0)) return LogDensity::off_support();
    std::vector<int> all(static_cast<std::size_t>(data_.size()));
    for (int i = 0; i < data_.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    const double lp = beta_lpdf(theta, a_, b_) + log_likelihood_rows(state, all);
    return LogDensity::of(lp);
  }

  double log_likelihood_rows(const ParameterState& state,
                             std::span<const int> row_indices) const override {
    const double theta = state.scalar("theta");
    double ll = 0.0;
    for (int i : row_indices) {
      const DataRow& r = data_.row(i);
      ll += is_noise_row(r) ? normal_lpdf(r.value, 0.0, 1.0)
                            : binomial_lpmf(r.value, r.trials, theta);
    }
    return ll;
  }

 private:
  double a_;
  double b_;
  LayoutPtr layout_;
  Dataset data_;
};

}  // namespace

BetaBinomialModel::BetaBinomialModel(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw_error(ErrorKind::Config, "beta-binomial prior shapes must be positive");
  }
  layout_ = std::make_shared<BlockLayout>(
      std::vector<BlockSpec>{BlockSpec::unit_interval("theta")});
}

std::unique_ptr<BoundModel> BetaBinomialModel::bind(const Dataset& data) const {
  data.validate_unique_keys();
  return std::make_unique<BoundBetaBinomial>(a_, b_, layout_, data);
}

std::vector<DataRow> BetaBinomialModel::simulate_predictive(const ParameterState& state,
                                                            std::span<const DataRow> pattern,
                                                            RngStream& rng) const {
  const double theta = state.scalar("theta");
  std::vector<DataRow> out;
  out.reserve(pattern.size());
  for (const DataRow& cell : pattern) {
    DataRow row = cell;
    if (is_noise_row(cell)) {
      row.value = rng.normal();
    } else {
      if (cell.trials < 1.0) {
        throw_error(ErrorKind::Data, "pattern cell is missing its trial count");
      }
      row.value = static_cast<double>(rng.binomial(static_cast<long long>(cell.trials), theta));
    }
    out.push_back(std::move(row));
  }
  return out;
}

ParameterState BetaBinomialModel::draw_initial(const Dataset& /*data*/, RngStream& rng) const {
  ParameterState state = ParameterState::zeros(layout_);
  state.set_scalar("theta", rng.beta(a_, b_));
  return state;
}

std::vector<TargetSpec> BetaBinomialModel::targets() const {
  return {TargetSpec::scalar_block("theta")};
}

bool BetaBinomialModel::supports_conditional_mean(const TargetSpec& target) const {
  return target.name == "theta";
}

Eigen::VectorXd BetaBinomialModel::conditional_mean_target(const ParameterState& /*state*/,
                                                           const Dataset& data,
                                                           const TargetSpec& target) const {
  if (!supports_conditional_mean(target)) {
    return Model::conditional_mean_target(ParameterState::zeros(layout_), data, target);
  }
  Eigen::VectorXd out(1);
  out[0] = posterior_mean(data);
  return out;
}

std::pair<double, double> BetaBinomialModel::posterior_shapes(const Dataset& data) const {
  double sum_y = 0.0, sum_n = 0.0;
  for (const DataRow& r : data.rows()) {
    if (is_noise_row(r)) continue;
    validate_row(r);
    sum_y += r.value;
    sum_n += r.trials;
  }
  return {a_ + sum_y, b_ + (sum_n - sum_y)};
}

double BetaBinomialModel::posterior_mean(const Dataset& data) const {
  auto [pa, pb] = posterior_shapes(data);
  return pa / (pa + pb);
}

double BetaBinomialModel::posterior_variance(const Dataset& data) const {
  auto [pa, pb] = posterior_shapes(data);
  const double s = pa + pb;
  return pa * pb / (s * s * (s + 1.0));
}

double beta_binomial_pvsi_exact(const BetaBinomialModel& model, const Dataset& data_old,
                                long long new_trials, long long max_outcomes) {
  if (new_trials < 0) throw_error(ErrorKind::Usage, "negative trial count");
  if (new_trials + 1 > max_outcomes) {
    throw_error(ErrorKind::Budget, "outcome space too large to enumerate: " +
                                       std::to_string(new_trials + 1) + " outcomes");
  }
  if (new_trials == 0) return 0.0;
  auto [pa, pb] = model.posterior_shapes(data_old);
  const double mean_old = pa / (pa + pb);
  // Total successes s over the new cells is sufficient; its predictive law is
  // beta-binomial(pa, pb, n).
  const double n = static_cast<double>(new_trials);
  double pvsi = 0.0;
  for (long long s = 0; s <= new_trials; ++s) {
    const double y = static_cast<double>(s);
    const double log_pmf = log_choose(n, y) + std::lgamma(pa + y) + std::lgamma(pb + n - y) -
                           std::lgamma(pa + pb + n) -
                           (std::lgamma(pa) + std::lgamma(pb) - std::lgamma(pa + pb));
    const double mean_new = (pa + y) / (pa + pb + n);
    const double shift = mean_new - mean_old;
    pvsi += std::exp(log_pmf) * shift * shift;
  }
  return pvsi;
}

}  // namespace voi

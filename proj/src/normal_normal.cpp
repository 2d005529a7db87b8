#include "voi/models/normal_normal.hpp"

#include "voi/errors.hpp"
#include "voi/special_functions.hpp"

namespace voi {

namespace {

bool is_noise_row(const DataRow& r) { return r.source == "noise"; }

class BoundNormalNormal : public BoundModel {
 public:
  BoundNormalNormal(double m0, double v0, double s2, LayoutPtr layout, const Dataset& data)
      : m0_(m0), v0_(v0), s2_(s2), layout_(std::move(layout)), data_(data) {}

  const LayoutPtr& layout() const override { return layout_; }

  LogDensity log_posterior(const ParameterState& state) const override {
    if (!state.layout().same_shape(*layout_)) {
      throw_error(ErrorKind::Schema, "state does not match normal-normal layout");
    }
    const double theta = state.scalar("theta");
    if (!std::isfinite(theta)) return LogDensity::off_support();
    std::vector<int> all(static_cast<std::size_t>(data_.size()));
    for (int i = 0; i < data_.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    return LogDensity::of(normal_lpdf(theta, m0_, v0_) + log_likelihood_rows(state, all));
  }

  double log_likelihood_rows(const ParameterState& state,
                             std::span<const int> row_indices) const override {
    const double theta = state.scalar("theta");
    double ll = 0.0;
    for (int i : row_indices) {
      const DataRow& r = data_.row(i);
      ll += is_noise_row(r) ? normal_lpdf(r.value, 0.0, 1.0) : normal_lpdf(r.value, theta, s2_);
    }
    return ll;
  }

 private:
  double m0_, v0_, s2_;
  LayoutPtr layout_;
  Dataset data_;
};

}  // namespace

NormalNormalModel::NormalNormalModel(double prior_mean, double prior_var, double obs_var)
    : m0_(prior_mean), v0_(prior_var), s2_(obs_var) {
  if (!(prior_var > 0.0) || !(obs_var > 0.0)) {
    throw_error(ErrorKind::Config, "normal-normal variances must be positive");
  }
  layout_ = std::make_shared<BlockLayout>(std::vector<BlockSpec>{BlockSpec::real("theta")});
}

std::unique_ptr<BoundModel> NormalNormalModel::bind(const Dataset& data) const {
  data.validate_unique_keys();
  return std::make_unique<BoundNormalNormal>(m0_, v0_, s2_, layout_, data);
}

std::vector<DataRow> NormalNormalModel::simulate_predictive(const ParameterState& state,
                                                            std::span<const DataRow> pattern,
                                                            RngStream& rng) const {
  const double theta = state.scalar("theta");
  std::vector<DataRow> out;
  out.reserve(pattern.size());
  for (const DataRow& cell : pattern) {
    DataRow row = cell;
    row.value = is_noise_row(cell) ? rng.normal() : rng.normal(theta, std::sqrt(s2_));
    out.push_back(std::move(row));
  }
  return out;
}

ParameterState NormalNormalModel::draw_initial(const Dataset& /*data*/, RngStream& rng) const {
  ParameterState state = ParameterState::zeros(layout_);
  state.set_scalar("theta", rng.normal(m0_, std::sqrt(v0_)));
  return state;
}

std::vector<TargetSpec> NormalNormalModel::targets() const {
  return {TargetSpec::scalar_block("theta")};
}

bool NormalNormalModel::supports_conditional_mean(const TargetSpec& target) const {
  return target.name == "theta";
}

Eigen::VectorXd NormalNormalModel::conditional_mean_target(const ParameterState& /*state*/,
                                                           const Dataset& data,
                                                           const TargetSpec& target) const {
  if (!supports_conditional_mean(target)) {
    return Model::conditional_mean_target(ParameterState::zeros(layout_), data, target);
  }
  Eigen::VectorXd out(1);
  out[0] = posterior_moments(data).first;
  return out;
}

std::pair<double, double> NormalNormalModel::posterior_moments(const Dataset& data) const {
  double sum_y = 0.0;
  int n = 0;
  for (const DataRow& r : data.rows()) {
    if (is_noise_row(r)) continue;
    sum_y += r.value;
    n += 1;
  }
  const double prec = 1.0 / v0_ + n / s2_;
  const double var = 1.0 / prec;
  const double mean = var * (m0_ / v0_ + sum_y / s2_);
  return {mean, var};
}

double NormalNormalModel::posterior_variance_for_count(int n_obs) const {
  return 1.0 / (1.0 / v0_ + n_obs / s2_);
}

double normal_normal_pvsi_exact(const NormalNormalModel& model, int n_old, int n_new) {
  return model.posterior_variance_for_count(n_old) -
         model.posterior_variance_for_count(n_old + n_new);
}

}  // namespace voi

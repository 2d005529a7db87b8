#include "voi/loss.hpp"

#include "voi/errors.hpp"

namespace voi {

LossSpec LossSpec::quadratic() { return LossSpec{}; }

LossSpec LossSpec::custom(
    std::string name, std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> f) {
  LossSpec spec;
  spec.kind = Kind::Custom;
  spec.name = std::move(name);
  spec.loss = std::move(f);
  return spec;
}

double LossSpec::operator()(const Eigen::VectorXd& action, const Eigen::VectorXd& truth) const {
  if (action.size() != truth.size()) {
    throw_error(ErrorKind::Usage, "loss: action and truth dimensions differ");
  }
  if (kind == Kind::Quadratic) {
    return (action - truth).squaredNorm();
  }
  return loss(action, truth);
}

Eigen::VectorXd LossSpec::gradient(const Eigen::VectorXd& action,
                                   const Eigen::VectorXd& truth) const {
  if (kind == Kind::Quadratic) {
    return 2.0 * (action - truth);
  }
  if (loss_grad) {
    return loss_grad(action, truth);
  }
  // Central differences at a scale-aware step.
  Eigen::VectorXd grad(action.size());
  for (int k = 0; k < action.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(action[k]));
    Eigen::VectorXd lo = action, hi = action;
    lo[k] -= h;
    hi[k] += h;
    grad[k] = (loss(hi, truth) - loss(lo, truth)) / (2.0 * h);
  }
  return grad;
}

}  // namespace voi

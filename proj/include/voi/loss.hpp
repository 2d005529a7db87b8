#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

namespace voi {

// Loss over (action, parameter-value) pairs. Quadratic loss sums squared
// component errors, so vector-target losses decompose exactly per component.
struct LossSpec {
  enum class Kind { Quadratic, Custom };

  Kind kind = Kind::Quadratic;
  std::string name = "quadratic";

  // Custom losses supply the loss and (optionally) its action gradient;
  // a central-difference fallback is used when the gradient is absent.
  std::function<double(const Eigen::VectorXd& action, const Eigen::VectorXd& truth)> loss;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& action, const Eigen::VectorXd& truth)>
      loss_grad;

  static LossSpec quadratic();
  static LossSpec custom(std::string name,
                         std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> f);

  double operator()(const Eigen::VectorXd& action, const Eigen::VectorXd& truth) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& action, const Eigen::VectorXd& truth) const;
};

}  // namespace voi

#pragma once

#include <cmath>

namespace voi {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454836;

// Logarithmic derivative of the gamma function. Recurrence into the
// asymptotic region followed by the Bernoulli series; relative accuracy
// better than 1e-12 for all x > 0.
double digamma(double x);

double logit(double p);
double sigmoid(double x);

double log_choose(double n, double k);

// Log densities. All return -inf outside the support of the argument.
double normal_lpdf(double x, double mean, double var);
double beta_lpdf(double x, double a, double b);
double binomial_lpmf(double k, double n, double p);
double gamma_lpdf(double x, double shape, double rate);
double inv_gamma_lpdf(double x, double shape, double scale);

}  // namespace voi

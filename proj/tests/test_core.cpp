#include <doctest.h>

#include <cmath>

#include "voi/data.hpp"
#include "voi/errors.hpp"
#include "voi/loss.hpp"
#include "voi/model.hpp"
#include "voi/models/beta_binomial.hpp"
#include "voi/models/normal_normal.hpp"
#include "voi/rng.hpp"
#include "voi/special_functions.hpp"
#include "voi/state.hpp"
#include "voi/target.hpp"

using namespace voi;

namespace {

Dataset binomial_dataset(std::vector<std::pair<double, double>> cells) {
  Dataset data;
  int site = 0;
  for (auto [n, y] : cells) {
    DataRow r;
    r.source = "obs";
    r.site = site++;
    r.year = 2000;
    r.trials = n;
    r.value = y;
    data.add_row(r);
  }
  return data;
}

}  // namespace

TEST_CASE("digamma: exact recurrence and symmetry cases") {
  // digamma(2) - digamma(1) = 1 by the recurrence digamma(x+1) = digamma(x) + 1/x
  CHECK(digamma(2.0) - digamma(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Euler-Mascheroni at 1, and the half-integer closed form
  CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-0.57721566490153286 - 2.0 * std::log(2.0))
                            .epsilon(1e-12));
  for (double x : {0.1, 0.7, 1.0, 3.2, 17.0, 250.0}) {
    CHECK(digamma(x) == doctest::Approx(digamma(x + 1.0) - 1.0 / x).epsilon(1e-12));
  }
}

TEST_CASE("logit and sigmoid are inverse and saturate safely") {
  for (double p : {1e-12, 0.25, 0.5, 0.999}) {
    CHECK(sigmoid(logit(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(sigmoid(1000.0) == 1.0);
  CHECK(sigmoid(-1000.0) == 0.0);
}

TEST_CASE("log densities match hand sums") {
  CHECK(binomial_lpmf(1, 2, 0.25) == doctest::Approx(std::log(2 * 0.25 * 0.75)));
  CHECK(beta_lpdf(0.3, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(normal_lpdf(0.0, 0.0, 1.0) == doctest::Approx(-0.5 * kLogTwoPi));
  CHECK(gamma_lpdf(1.0, 1.0, 1.0) == doctest::Approx(-1.0));
  // InverseGamma(.5,.5) at 1: log(.5^.5 / Gamma(.5)) - 2*... hand value
  CHECK(inv_gamma_lpdf(1.0, 0.5, 0.5) ==
        doctest::Approx(0.5 * std::log(0.5) - std::lgamma(0.5) - 0.5));
  CHECK(beta_lpdf(1.2, 1.0, 1.0) == kNegInf);
  CHECK(binomial_lpmf(3, 2, 0.5) == kNegInf);
}

TEST_CASE("block layout rejects duplicates and unknown names") {
  CHECK_THROWS_AS(BlockLayout({BlockSpec::real("a"), BlockSpec::real("a")}), Error);
  BlockLayout layout({BlockSpec::real("a", 2), BlockSpec::positive("b")});
  CHECK(layout.total_size() == 3);
  CHECK(layout.index_of("b") == 1);
  CHECK_THROWS_AS(layout.index_of("zz"), Error);
  const auto names = layout.coordinate_names();
  CHECK(names[0] == "a[0]");
  CHECK(names[2] == "b");
}

TEST_CASE("parameter state support checks") {
  auto layout = std::make_shared<BlockLayout>(
      std::vector<BlockSpec>{BlockSpec::unit_interval("p"), BlockSpec::real("x")});
  ParameterState state = ParameterState::zeros(layout);
  state.set_scalar("p", 0.5);
  CHECK(state.in_declared_support());
  state.set_scalar("p", 1.2);
  CHECK_FALSE(state.in_declared_support());
}

TEST_CASE("dataset key uniqueness and partition tiling") {
  Dataset data = binomial_dataset({{2, 1}, {3, 2}, {4, 0}});
  DataRow dup = data.row(0);
  Dataset bad = data;
  bad.add_row(dup);
  CHECK_THROWS_AS(bad.validate_unique_keys(), Error);

  auto partitions = make_partitions(data, PartitionScheme::BySite);
  CHECK(partitions.size() == 3);
  validate_partitions(data, partitions);
  CHECK(partitions[0].selected.size() == 1);
  CHECK(partitions[0].complement.size() == 2);

  auto single = make_partitions(data, PartitionScheme::Single);
  CHECK(single.size() == 1);
  CHECK(single[0].complement.empty());
  validate_partitions(data, single);
}

TEST_CASE("dataset content hash is order-insensitive but value-sensitive") {
  Dataset a = binomial_dataset({{2, 1}, {3, 2}});
  Dataset b;
  b.add_row(a.row(1));
  b.add_row(a.row(0));
  CHECK(a.content_hash() == b.content_hash());
  Dataset c = binomial_dataset({{2, 1}, {3, 1}});
  CHECK(a.content_hash() != c.content_hash());
}

TEST_CASE("beta-binomial log posterior: hand-summed density") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset data = binomial_dataset({{2, 1}});
  ParameterState state = ParameterState::zeros(model.layout());
  state.set_scalar("theta", 0.5);
  const LogDensity d = model.log_posterior(state, data);
  CHECK(d.in_support);
  CHECK(d.value == doctest::Approx(std::log(0.5)));

  state.set_scalar("theta", 1.2);
  CHECK_FALSE(model.log_posterior(state, data).in_support);

  // empty dataset: log prior only
  state.set_scalar("theta", 0.3);
  CHECK(model.log_posterior(state, Dataset{}).value ==
        doctest::Approx(beta_lpdf(0.3, 1.0, 1.0)));
}

TEST_CASE("simulate_predictive: degenerate probability and empty pattern") {
  BetaBinomialModel model(1.0, 1.0);
  RngStream rng(7);
  ParameterState state = ParameterState::zeros(model.layout());
  state.set_scalar("theta", 1.0);
  Dataset data = binomial_dataset({{9, 0}});
  auto pattern = make_pattern(data, std::vector<int>{0});
  auto rows = model.simulate_predictive(state, pattern, rng);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].value == 9.0);  // success probability one fills every trial
  CHECK(rows[0].trials == 9.0);

  CHECK(model.simulate_predictive(state, {}, rng).empty());
}

TEST_CASE("simulated data is always in-support for the posterior") {
  BetaBinomialModel model(2.0, 3.0);
  RngStream rng(11);
  Dataset data = binomial_dataset({{5, 2}, {8, 1}});
  auto pattern = make_pattern(data, std::vector<int>{0, 1});
  for (int rep = 0; rep < 50; ++rep) {
    ParameterState state = model.draw_initial(data, rng);
    auto rows = model.simulate_predictive(state, pattern, rng);
    Dataset sim;
    for (auto& r : rows) sim.add_row(r);
    const LogDensity d = model.log_posterior(state, sim);
    CHECK(d.in_support);
    CHECK(std::isfinite(d.value));
  }
}

TEST_CASE("beta-binomial exact PVSI by enumeration") {
  BetaBinomialModel model(1.0, 1.0);
  CHECK(beta_binomial_pvsi_exact(model, Dataset{}, 2) == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
  CHECK(beta_binomial_pvsi_exact(model, Dataset{}, 0) == 0.0);
  CHECK_THROWS_AS(beta_binomial_pvsi_exact(model, Dataset{}, 100, 50), Error);
  // with prior data the variance-decomposition bound still holds
  Dataset old_data = binomial_dataset({{10, 4}});
  const double pvsi = beta_binomial_pvsi_exact(model, old_data, 6);
  CHECK(pvsi > 0.0);
  CHECK(pvsi < model.posterior_variance(old_data));
}

TEST_CASE("normal-normal conjugate forms") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset data;
  DataRow r;
  r.source = "obs";
  r.value = 2.0;
  data.add_row(r);
  auto [mean, var] = model.posterior_moments(data);
  CHECK(mean == doctest::Approx(1.0));
  CHECK(var == doctest::Approx(0.5));
  CHECK(normal_normal_pvsi_exact(model, 0, 1) == doctest::Approx(0.5));
  CHECK(normal_normal_pvsi_exact(model, 1, 1) == doctest::Approx(0.5 - 1.0 / 3.0));
}

TEST_CASE("conditional mean target equals conjugate posterior mean") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset data;
  DataRow r;
  r.source = "obs";
  r.value = 2.0;
  data.add_row(r);
  ParameterState state = ParameterState::zeros(model.layout());
  const TargetSpec target = model.targets()[0];
  REQUIRE(model.supports_conditional_mean(target));
  CHECK(model.conditional_mean_target(state, data, target)[0] == doctest::Approx(1.0));
}

TEST_CASE("law of total expectation for beta-binomial conditional means") {
  BetaBinomialModel model(2.0, 5.0);
  const TargetSpec target = model.targets()[0];
  RngStream rng(123);
  Dataset proto = binomial_dataset({{12, 0}});
  auto pattern = make_pattern(proto, std::vector<int>{0});
  const int reps = 4000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < reps; ++i) {
    ParameterState state = model.draw_initial(Dataset{}, rng);
    auto rows = model.simulate_predictive(state, pattern, rng);
    Dataset sim;
    sim.add_row(rows[0]);
    const double z = model.conditional_mean_target(state, sim, target)[0];
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sumsq / reps - mean * mean) / reps);
  const double prior_mean = 2.0 / 7.0;
  CHECK(std::abs(mean - prior_mean) < 3.0 * sd);
}

TEST_CASE("eval_target reports missing blocks as schema errors") {
  auto layout = std::make_shared<BlockLayout>(std::vector<BlockSpec>{BlockSpec::real("x")});
  ParameterState state = ParameterState::zeros(layout);
  TargetSpec target = TargetSpec::scalar_block("y");
  CHECK_THROWS_AS(eval_target(state, target), Error);
}

TEST_CASE("quadratic loss sums squared component errors") {
  LossSpec loss = LossSpec::quadratic();
  Eigen::VectorXd a(2), b(2);
  a << 0.3, -0.4;
  b << 0.0, 0.0;
  CHECK(loss(a, b) == doctest::Approx(0.25));
  CHECK(loss(b, b) == 0.0);
  const Eigen::VectorXd g = loss.gradient(a, b);
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(-0.8));
}

TEST_CASE("custom loss numeric gradient fallback") {
  LossSpec loss = LossSpec::custom("abs", [](const Eigen::VectorXd& a, const Eigen::VectorXd& t) {
    return (a - t).cwiseAbs().sum();
  });
  Eigen::VectorXd a(1), t(1);
  a << 2.0;
  t << 0.5;
  CHECK(loss(a, t) == doctest::Approx(1.5));
  CHECK(loss.gradient(a, t)[0] == doctest::Approx(1.0).epsilon(1e-4));
}

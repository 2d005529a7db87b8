#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "voi/chain_io.hpp"
#include "voi/errors.hpp"
#include "voi/models/beta_binomial.hpp"
#include "voi/models/normal_normal.hpp"
#include "voi/sampler.hpp"

using namespace voi;

namespace {

Dataset one_binomial(double n, double y) {
  Dataset data;
  DataRow r;
  r.source = "obs";
  r.trials = n;
  r.value = y;
  data.add_row(r);
  return data;
}

SamplerConfig quick_config(std::uint64_t seed, long iterations = 30000) {
  SamplerConfig config;
  config.iterations = iterations;
  config.burn_in_fraction = 0.5;
  config.thinning = 1;
  config.seed = seed;
  return config;
}

PosteriorChain series_chain(const Eigen::VectorXd& series) {
  auto layout = std::make_shared<BlockLayout>(std::vector<BlockSpec>{BlockSpec::real("theta")});
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(series.size()));
  for (int i = 0; i < series.size(); ++i) {
    Eigen::VectorXd v(1);
    v << series[i];
    draws.push_back(v);
  }
  return PosteriorChain(layout, std::move(draws), ChainProvenance{}, {});
}

}  // namespace

TEST_CASE("config invariants") {
  SamplerConfig config;
  config.iterations = 100;
  config.burn_in_fraction = 1.0;
  CHECK_THROWS_AS(config.validate(), Error);
  config.burn_in_fraction = 0.5;
  config.thinning = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config.thinning = 2;
  config.default_scale = -1.0;
  CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("beta-binomial chain matches the conjugate posterior") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset data = one_binomial(10, 7);
  PosteriorChain chain = sample_posterior(model, data, quick_config(42));
  const TargetSpec target = model.targets()[0];

  CHECK(chain.size() == 15000);
  const double mean = chain_mean(chain, target)[0];
  const double se = chain_mc_error(chain, target)[0];
  CHECK(std::abs(mean - 8.0 / 12.0) < 2.0 * se);

  const double var = chain_variance(chain, target)[0];
  const double exact_var = model.posterior_variance(data);
  CHECK(var == doctest::Approx(exact_var).epsilon(0.15));

  // all stored draws in-support
  chain.for_each_state([&](const ParameterState& s) { CHECK(s.in_declared_support()); });
}

TEST_CASE("normal-normal chain matches conjugate mean and variance") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset data;
  DataRow r;
  r.source = "obs";
  r.value = 2.0;
  data.add_row(r);
  PosteriorChain chain = sample_posterior(model, data, quick_config(9));
  const TargetSpec target = model.targets()[0];
  const double mean = chain_mean(chain, target)[0];
  const double se = chain_mc_error(chain, target)[0];
  CHECK(std::abs(mean - 1.0) < 3.0 * se);
  CHECK(chain_variance(chain, target)[0] == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("empty dataset chains target the prior") {
  BetaBinomialModel model(3.0, 2.0);
  PosteriorChain chain = sample_posterior(model, Dataset{}, quick_config(5), "prior");
  const TargetSpec target = model.targets()[0];
  const double mean = chain_mean(chain, target)[0];
  const double se = chain_mc_error(chain, target)[0];
  CHECK(std::abs(mean - 0.6) < 3.0 * se);
  CHECK(chain.provenance().partition_label == "prior");
  CHECK(chain.provenance().conditioned_row_count == 0);
}

TEST_CASE("identical seeds give bit-identical chains, different seeds differ") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset data = one_binomial(6, 2);
  PosteriorChain a = sample_posterior(model, data, quick_config(77, 4000));
  PosteriorChain b = sample_posterior(model, data, quick_config(77, 4000));
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.draws()[i] == b.draws()[i]);
  }
  PosteriorChain c = sample_posterior(model, data, quick_config(78, 4000));
  bool any_diff = false;
  for (int i = 0; i < a.size(); ++i) {
    if (a.draws()[i] != c.draws()[i]) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("draw count and acceptance-rate bookkeeping") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset data = one_binomial(5, 3);
  SamplerConfig config = quick_config(3, 10000);
  config.thinning = 4;
  PosteriorChain chain = sample_posterior(model, data, config);
  CHECK(chain.size() == (10000 - 5000) / 4);
  REQUIRE(chain.acceptance_rates().count("theta") == 1);
  const double rate = chain.acceptance_rates().at("theta");
  CHECK(rate > 0.1);
  CHECK(rate < 0.7);
}

TEST_CASE("chain_mean usage errors") {
  PosteriorChain empty;
  TargetSpec target = TargetSpec::scalar_block("theta");
  CHECK_THROWS_AS(chain_mean(empty, target), Error);
}

TEST_CASE("constant and alternating chains in chain_mean") {
  Eigen::VectorXd constant = Eigen::VectorXd::Constant(100, 2.5);
  PosteriorChain chain = series_chain(constant);
  TargetSpec target = TargetSpec::scalar_block("theta");
  CHECK(chain_mean(chain, target)[0] == doctest::Approx(2.5));

  Eigen::VectorXd alternating(100);
  for (int i = 0; i < 100; ++i) alternating[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK(chain_mean(series_chain(alternating), target)[0] == doctest::Approx(0.0));
}

TEST_CASE("effective sample size: independent, AR(1), alternating, constant") {
  RngStream rng(2024);
  const int n = 20000;

  Eigen::VectorXd iid(n);
  for (int i = 0; i < n; ++i) iid[i] = rng.normal();
  const double ess_iid = series_ess(iid);
  CHECK(ess_iid > 0.8 * n);
  CHECK(ess_iid <= n);

  Eigen::VectorXd ar1(n);
  ar1[0] = rng.normal();
  const double rho = 0.5;
  for (int i = 1; i < n; ++i) ar1[i] = rho * ar1[i - 1] + std::sqrt(1 - rho * rho) * rng.normal();
  CHECK(series_ess(ar1) == doctest::Approx(n / 3.0).epsilon(0.2));

  Eigen::VectorXd alternating(n);
  for (int i = 0; i < n; ++i) alternating[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK(series_ess(alternating) == doctest::Approx(static_cast<double>(n)));  // clipped

  Eigen::VectorXd constant = Eigen::VectorXd::Constant(n, 3.0);
  CHECK(series_ess(constant) == doctest::Approx(static_cast<double>(n)));

  Eigen::VectorXd tiny = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(series_ess(tiny), Error);
}

TEST_CASE("chain round-trips through the columnar format") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset data = one_binomial(4, 1);
  PosteriorChain chain = sample_posterior(model, data, quick_config(31, 2000));
  const std::string base = (std::filesystem::temp_directory_path() / "voikit_chain_test").string();
  save_chain(chain, base);
  PosteriorChain loaded = load_chain(base);
  REQUIRE(loaded.size() == chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    CHECK(loaded.draws()[i] == chain.draws()[i]);
  }
  CHECK(loaded.provenance().dataset_hash == chain.provenance().dataset_hash);
  CHECK(loaded.provenance().config_hash == chain.provenance().config_hash);
  CHECK(loaded.acceptance_rates() == chain.acceptance_rates());
  std::remove((base + ".csv").c_str());
  std::remove((base + ".json").c_str());
}

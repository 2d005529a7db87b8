#include <doctest.h>

#include <cmath>

#include "voi/errors.hpp"
#include "voi/models/beta_binomial.hpp"
#include "voi/models/normal_normal.hpp"
#include "voi/voi.hpp"

using namespace voi;

namespace {

SamplerConfig chain_config(std::uint64_t seed, long iterations = 30000) {
  SamplerConfig config;
  config.iterations = iterations;
  config.burn_in_fraction = 0.5;
  config.thinning = 1;
  config.seed = seed;
  return config;
}

RegressionConfig small_grid(std::uint64_t seed) {
  RegressionConfig config;
  config.layer_options = {1};
  config.node_options = {20};
  config.dropout_options = {0.3};
  config.epochs = 60;
  config.batch_size = 128;
  config.max_draws = 3000;
  config.seed = seed;
  return config;
}

Dataset single_obs_dataset(double value, const std::string& source = "obs") {
  Dataset data;
  DataRow r;
  r.source = source;
  r.value = value;
  data.add_row(r);
  return data;
}

PosteriorChain constant_vector_chain(const Eigen::Vector2d& value, std::uint64_t dataset_hash) {
  auto layout = std::make_shared<BlockLayout>(std::vector<BlockSpec>{BlockSpec::real("pair", 2)});
  std::vector<Eigen::VectorXd> draws(50, value);
  ChainProvenance prov;
  prov.dataset_hash = dataset_hash;
  return PosteriorChain(layout, std::move(draws), prov, {});
}

TargetSpec pair_target() {
  TargetSpec t;
  t.name = "pair";
  t.components = {"pair[0]", "pair[1]"};
  t.target_blocks = {"pair"};
  t.evaluate = [](const ParameterState& s) { return Eigen::VectorXd(s.block("pair")); };
  return t;
}

}  // namespace

TEST_CASE("rvsi: identical chains give zero, vector shifts add componentwise") {
  PosteriorChain a = constant_vector_chain({0.0, 0.0}, 1);
  PosteriorChain b = constant_vector_chain({0.3, -0.4}, 1);
  const TargetSpec target = pair_target();
  CHECK(rvsi_quadratic(a, a, target).value == 0.0);
  CHECK(rvsi_quadratic(b, a, target).value == doctest::Approx(0.25).epsilon(1e-12));

  PosteriorChain other = constant_vector_chain({0.0, 0.0}, 2);
  CHECK_THROWS_AS(rvsi_quadratic(a, other, target), Error);
}

TEST_CASE("rvsi on normal-normal: prior to posterior shift of one observation") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset data = single_obs_dataset(2.0);
  const TargetSpec target = model.targets()[0];

  PosteriorChain full = sample_posterior(model, data, chain_config(11), "full");
  std::vector<int> none;
  Dataset empty = data.subset(none);
  PosteriorChain reduced =
      sample_posterior(model, empty, chain_config(13), "loo:obs", data.content_hash());

  const VoiValue rvsi = rvsi_quadratic(full, reduced, target);
  CHECK(std::abs(rvsi.value - 1.0) < 3.0 * rvsi.mc_error);
}

TEST_CASE("nested MC PVSI matches the enumeration oracle on the beta-binomial") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset proto;
  DataRow cell;
  cell.source = "obs";
  cell.trials = 2;
  proto.add_row(cell);
  const auto pattern = make_pattern(proto, std::vector<int>{0});

  NestedMcConfig config;
  config.outer_draws = 600;
  config.outer = chain_config(0, 8000);
  config.inner = chain_config(0, 4000);
  config.seed = 99;
  const VoiValue pvsi = pvsi_nested_mc(model, Dataset{}, pattern, model.targets()[0], config);
  CHECK(pvsi.value == doctest::Approx(1.0 / 24.0).epsilon(0.12));

  // budget guard refuses oversized runs unless overridden
  NestedMcConfig big = config;
  big.outer_draws = 100000;
  big.inner.iterations = 100000;
  CHECK_THROWS_AS(pvsi_nested_mc(model, Dataset{}, pattern, model.targets()[0], big), Error);
}

TEST_CASE("regression PVSI matches the enumeration oracle on the beta-binomial") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset proto;
  DataRow cell;
  cell.source = "obs";
  cell.trials = 2;
  proto.add_row(cell);
  const auto pattern = make_pattern(proto, std::vector<int>{0});
  const TargetSpec target = model.targets()[0];

  PosteriorChain prior_chain = sample_posterior(model, Dataset{}, chain_config(21), "prior");
  const PvsiEstimate est =
      pvsi_regression(prior_chain, model, Dataset{}, pattern, target, small_grid(5));
  CHECK(est.value == doctest::Approx(1.0 / 24.0).epsilon(0.10));
  CHECK(est.value <= 1.0 / 12.0);  // bounded by the prior variance
  REQUIRE(est.components.size() == 1);
  CHECK(est.components[0].scores.size() >= 2);
}

TEST_CASE("rao-blackwell PVSI on the normal-normal model: exact response, conjugate value") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset proto = single_obs_dataset(0.0);
  const auto pattern = make_pattern(proto, std::vector<int>{0});
  const TargetSpec target = model.targets()[0];

  PosteriorChain prior_chain = sample_posterior(model, Dataset{}, chain_config(33), "prior");
  const PvsiEstimate rb =
      pvsi_rao_blackwell(prior_chain, model, Dataset{}, pattern, target, small_grid(8));
  CHECK(rb.value == doctest::Approx(0.5).epsilon(0.08));
  // the conditional-mean response has smaller variance than the raw draws
  CHECK(rb.components[0].response_variance < rb.components[0].raw_target_variance);

  const PvsiEstimate raw =
      pvsi_regression(prior_chain, model, Dataset{}, pattern, target, small_grid(8));
  CHECK(raw.value == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("pure-noise partitions carry no prospective value") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset proto = single_obs_dataset(0.0, "noise");
  const auto pattern = make_pattern(proto, std::vector<int>{0});
  PosteriorChain prior_chain = sample_posterior(model, Dataset{}, chain_config(41), "prior");
  const PvsiEstimate est =
      pvsi_regression(prior_chain, model, Dataset{}, pattern, model.targets()[0], small_grid(2));
  CHECK(est.value < 0.05);  // posterior variance is 1; the overfit floor is tiny
}

TEST_CASE("empty patterns yield exactly zero PVSI") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  PosteriorChain prior_chain = sample_posterior(model, Dataset{}, chain_config(43, 4000), "prior");
  const PvsiEstimate est = pvsi_regression(prior_chain, model, Dataset{}, {}, model.targets()[0],
                                           small_grid(2));
  CHECK(est.value == 0.0);
}

TEST_CASE("generic-loss PVSI: quadratic route agrees, absolute loss matches closed form") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset proto = single_obs_dataset(0.0);
  const auto pattern = make_pattern(proto, std::vector<int>{0});
  const TargetSpec target = model.targets()[0];
  PosteriorChain prior_chain = sample_posterior(model, Dataset{}, chain_config(51), "prior");

  GenericPvsiConfig config;
  config.regression = small_grid(3);
  const PvsiEstimate quad = pvsi_generic(prior_chain, model, Dataset{}, pattern, target,
                                         LossSpec::quadratic(), config);
  CHECK(quad.value == doctest::Approx(0.5).epsilon(0.10));

  // |theta - a|: the Bayes action is the posterior median; for this conjugate
  // pair PVSI = sqrt(2/pi) - 1/sqrt(pi) exactly
  LossSpec abs_loss =
      LossSpec::custom("absolute", [](const Eigen::VectorXd& a, const Eigen::VectorXd& t) {
        return (a - t).cwiseAbs().sum();
      });
  const PvsiEstimate abs_est =
      pvsi_generic(prior_chain, model, Dataset{}, pattern, target, abs_loss, config);
  const double exact = std::sqrt(2.0 / M_PI) - 1.0 / std::sqrt(M_PI);
  CHECK(abs_est.value == doctest::Approx(exact).epsilon(0.15));
  CHECK(abs_est.value >= 0.0);

  // single-action decision space: no decision can change, PVSI is exactly 0
  GenericPvsiConfig constant_only;
  constant_only.regression = small_grid(3);
  constant_only.estimators = {DecisionEstimatorKind::ConstantOnly};
  const PvsiEstimate none = pvsi_generic(prior_chain, model, Dataset{}, pattern, target,
                                         LossSpec::quadratic(), constant_only);
  CHECK(none.value == 0.0);
}

TEST_CASE("evoir: ratio, undefined floor") {
  CHECK(evoir(0.5, 0.5, 1.0).value == doctest::Approx(1.0));
  CHECK(evoir(0.5, 0.5, 1.0).defined);
  CHECK_FALSE(evoir(0.5, 1e-12, 1.0).defined);
  CHECK_FALSE(evoir(0.0, 0.0, 1.0).defined);
}

TEST_CASE("surprise probability endpoints") {
  BetaBinomialModel model(1.0, 1.0);
  Dataset proto;
  DataRow cell;
  cell.source = "obs";
  cell.trials = 2;
  proto.add_row(cell);
  const auto pattern = make_pattern(proto, std::vector<int>{0});
  PosteriorChain prior_chain = sample_posterior(model, Dataset{}, chain_config(61), "prior");
  const PvsiEstimate est =
      pvsi_regression(prior_chain, model, Dataset{}, pattern, model.targets()[0], small_grid(4));

  CHECK(surprise_probability(est, 0.0) == doctest::Approx(1.0));
  CHECK(surprise_probability(est, 1e9) == 0.0);
  const double mid = surprise_probability(est, est.value);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("taxonomy: four cases plus the undefined label") {
  TaxonomyThresholds thresholds;  // rvsi quantile .75, evoir cutoff 1.5
  std::vector<double> batch;
  for (int i = 1; i <= 20; ++i) batch.push_back(0.01 * i);
  const double cutoff = rvsi_batch_cutoff(batch, thresholds);

  const Evoir low_evoir{0.3, true};
  const Evoir high_evoir{3.0, true};
  // 95th percentile RVSI, low EVOIR -> influential but expected
  CHECK(classify_taxonomy(0.19, low_evoir, cutoff, thresholds).case_number == 2);
  // 10th percentile RVSI, high EVOIR -> surprising but not influential
  CHECK(classify_taxonomy(0.02, high_evoir, cutoff, thresholds).case_number == 3);
  CHECK(classify_taxonomy(0.02, low_evoir, cutoff, thresholds).case_number == 1);
  const TaxonomyCase worst = classify_taxonomy(0.19, high_evoir, cutoff, thresholds);
  CHECK(worst.case_number == 4);
  CHECK(worst.label == "most-worrisome");
  CHECK(classify_taxonomy(0.19, Evoir{}, cutoff, thresholds).case_number == 0);
}

TEST_CASE("prospective designs: overlap rejected, empty design is zero") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset observed = single_obs_dataset(2.0);
  PosteriorChain chain = sample_posterior(model, observed, chain_config(71, 8000), "full");

  // overlapping cell
  DataRow overlap = observed.row(0);
  std::vector<DataRow> bad = {overlap};
  CHECK_THROWS_AS(prospective_design_value(chain, model, observed, bad, model.targets()[0],
                                           small_grid(6)),
                  Error);

  const PvsiEstimate none =
      prospective_design_value(chain, model, observed, {}, model.targets()[0], small_grid(6));
  CHECK(none.value == 0.0);

  // one future observation: conjugate drop v_old - v_new = 1/2 - 1/3
  DataRow future;
  future.source = "obs";
  future.site = 1;
  std::vector<DataRow> design = {future};
  const PvsiEstimate est = prospective_design_value(chain, model, observed, design,
                                                    model.targets()[0], small_grid(6));
  CHECK(est.value == doctest::Approx(0.5 - 1.0 / 3.0).epsilon(0.15));
}

TEST_CASE("partition-based PVSI wrappers check chain provenance") {
  NormalNormalModel model(0.0, 1.0, 1.0);
  Dataset data;
  for (int i = 0; i < 3; ++i) {
    DataRow r;
    r.source = "obs";
    r.site = i;
    r.value = 0.5 * i;
    data.add_row(r);
  }
  const auto partitions = make_partitions(data, PartitionScheme::BySite);
  const DataPartition& part = partitions[0];

  PosteriorChain reduced =
      sample_posterior(model, data.subset(part.complement), chain_config(81, 20000),
                       "loo:" + part.label, data.content_hash());
  CHECK(reduced.provenance().conditioned_row_count == 2);

  // happy path: PVSI of re-observing the held-out site, conjugate value
  const PvsiEstimate est =
      pvsi_regression_partition(reduced, model, data, part, model.targets()[0], small_grid(7));
  CHECK(est.value == doctest::Approx(normal_normal_pvsi_exact(model, 2, 1)).epsilon(0.15));

  // wrapper rejects a chain fit on the wrong rows
  PosteriorChain wrong = sample_posterior(model, data, chain_config(82, 8000), "full");
  CHECK_THROWS_AS(pvsi_regression_partition(wrong, model, data, part, model.targets()[0],
                                            small_grid(7)),
                  Error);
}

#include "voi/sampler.hpp"

#include <cmath>
#include <string>

#include "voi/errors.hpp"
#include "voi/special_functions.hpp"

namespace voi {

void SamplerConfig::validate() const {
  if (iterations <= 0) throw_error(ErrorKind::Config, "sampler: iterations must be positive");
  if (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0) {
    throw_error(ErrorKind::Config, "sampler: burn-in fraction must lie in [0, 1)");
  }
  if (iterations <= burn_in()) {
    throw_error(ErrorKind::Config, "sampler: iterations must exceed burn-in");
  }
  if (thinning < 1) throw_error(ErrorKind::Config, "sampler: thinning must be >= 1");
  if (!(default_scale > 0.0)) throw_error(ErrorKind::Config, "sampler: scales must be positive");
  for (const auto& [block, scale] : block_scales) {
    if (!(scale > 0.0)) {
      throw_error(ErrorKind::Config, "sampler: scale for block '" + block + "' must be positive");
    }
  }
}

std::uint64_t SamplerConfig::hash() const {
  std::string repr = "it=" + std::to_string(iterations) +
                     ";burn=" + std::to_string(burn_in_fraction) +
                     ";thin=" + std::to_string(thinning) +
                     ";scale=" + std::to_string(default_scale) +
                     ";window=" + std::to_string(adaptation_window) +
                     ";warmup=" + std::to_string(warmup_sweeps);
  for (const auto& [block, scale] : block_scales) {
    repr += ";" + block + "=" + std::to_string(scale);
  }
  return fnv1a64(repr);
}

PosteriorChain::PosteriorChain(LayoutPtr layout, std::vector<Eigen::VectorXd> draws,
                               ChainProvenance provenance,
                               std::map<std::string, double> acceptance_rates)
    : layout_(std::move(layout)),
      draws_(std::move(draws)),
      provenance_(std::move(provenance)),
      acceptance_rates_(std::move(acceptance_rates)) {}

ParameterState PosteriorChain::state(int i) const {
  return {layout_, draws_[static_cast<std::size_t>(i)]};
}

namespace {

constexpr double kTargetAcceptance = 0.44;

struct CoordinateSampler {
  double scale = 0.5;
  long proposals_recorded = 0;  // post-burn-in
  long accepts_recorded = 0;
  long adapt_steps = 0;
};

// Log density of the proposal-space reparameterization at x. Random walks
// run on logit/log transforms of constrained coordinates; the Jacobian keeps
// the walk targeting the right distribution on the original scale.
double log_jacobian(double x, Support support) {
  switch (support) {
    case Support::Positive:
      return std::log(x);
    case Support::UnitInterval:
      return std::log(x) + std::log1p(-x);
    default:
      return 0.0;
  }
}

double propose(double x, const BlockSpec& spec, int coord, double scale, RngStream& rng) {
  switch (spec.support) {
    case Support::Real:
      return x + scale * rng.normal();
    case Support::Positive:
      return x * std::exp(scale * rng.normal());
    case Support::UnitInterval:
      return sigmoid(logit(x) + scale * rng.normal());
    case Support::Count: {
      const double step = std::ceil(std::abs(rng.normal()) * scale);
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      (void)coord;
      return x + sign * step;
    }
  }
  return x;
}

}  // namespace

PosteriorChain sample_posterior(const Model& model, const Dataset& data,
                                const SamplerConfig& config, const std::string& partition_label,
                                std::uint64_t universe_hash) {
  config.validate();
  const std::unique_ptr<BoundModel> bound = model.bind(data);
  const LayoutPtr layout = bound->layout();
  const BlockLayout& blocks = *layout;

  RngStream rng(config.seed);

  // Initialization: prior draws retried until in-support.
  ParameterState state = ParameterState::zeros(layout);
  bool initialized = false;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    state = model.draw_initial(data, rng);
    if (!state.layout().same_shape(blocks)) {
      throw_error(ErrorKind::Schema, "draw_initial layout does not match bound model");
    }
    const LogDensity d = bound->log_posterior(state);
    if (d.in_support && std::isfinite(d.value)) {
      initialized = true;
      break;
    }
  }
  if (!initialized) {
    throw_error(ErrorKind::Init, "no in-support starting state found in 1000 prior draws");
  }

  std::vector<CoordinateSampler> coords(static_cast<std::size_t>(blocks.total_size()));
  for (int b = 0; b < blocks.block_count(); ++b) {
    const auto it = config.block_scales.find(blocks.spec(b).name);
    const double scale = it != config.block_scales.end() ? it->second : config.default_scale;
    for (int i = 0; i < blocks.spec(b).size; ++i) {
      coords[static_cast<std::size_t>(blocks.offset(b) + i)].scale = scale;
    }
  }

  const long burn = config.burn_in();
  const long warmup = std::min<long>(config.warmup_sweeps, burn);
  const long stored_total = (config.iterations - burn) / config.thinning;
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(std::max<long>(stored_total, 0)));

  for (long sweep = 1; sweep <= config.iterations; ++sweep) {
    const bool adapting = sweep > warmup && sweep <= burn;
    const bool recording = sweep > burn;
    for (int b = 0; b < blocks.block_count(); ++b) {
      const BlockSpec& spec = blocks.spec(b);
      const int off = blocks.offset(b);
      for (int i = 0; i < spec.size; ++i) {
        CoordinateSampler& cs = coords[static_cast<std::size_t>(off + i)];
        const double x = state.get(b, i);
        const double proposed = propose(x, spec, i, cs.scale, rng);
        bool accepted = false;
        if (value_in_support(proposed, spec, i)) {
          const double local_old = bound->log_posterior_local(state, b, i) +
                                   log_jacobian(x, spec.support);
          state.set(b, i, proposed);
          const double local_new = bound->log_posterior_local(state, b, i) +
                                   log_jacobian(proposed, spec.support);
          const double log_alpha = local_new - local_old;
          if (std::isfinite(local_new) &&
              (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha)) {
            accepted = true;
          } else {
            state.set(b, i, x);
          }
        }
        if (adapting) {
          cs.adapt_steps += 1;
          const double gamma = std::pow(
              static_cast<double>(config.adaptation_window) /
                  (config.adaptation_window + static_cast<double>(cs.adapt_steps)),
              0.7);
          cs.scale *= std::exp(gamma * ((accepted ? 1.0 : 0.0) - kTargetAcceptance));
        }
        if (recording) {
          cs.proposals_recorded += 1;
          if (accepted) cs.accepts_recorded += 1;
        }
      }
    }
    if (recording && (sweep - burn) % config.thinning == 0) {
      draws.push_back(state.flat());
    }
  }

  std::map<std::string, double> acceptance;
  for (int b = 0; b < blocks.block_count(); ++b) {
    const BlockSpec& spec = blocks.spec(b);
    long proposals = 0, accepts = 0;
    for (int i = 0; i < spec.size; ++i) {
      const CoordinateSampler& cs = coords[static_cast<std::size_t>(blocks.offset(b) + i)];
      proposals += cs.proposals_recorded;
      accepts += cs.accepts_recorded;
    }
    acceptance[spec.name] =
        proposals > 0 ? static_cast<double>(accepts) / static_cast<double>(proposals) : 0.0;
  }

  std::vector<int> all_rows(static_cast<std::size_t>(data.size()));
  for (int i = 0; i < data.size(); ++i) all_rows[static_cast<std::size_t>(i)] = i;

  ChainProvenance prov;
  prov.model_name = model.name();
  prov.dataset_hash = universe_hash != 0 ? universe_hash : data.content_hash();
  prov.conditioned_rows_hash = data.rows_hash(all_rows);
  prov.conditioned_row_count = data.size();
  prov.partition_label = partition_label;
  prov.config_hash = config.hash();
  prov.seed = config.seed;

  return PosteriorChain(layout, std::move(draws), std::move(prov), std::move(acceptance));
}

Eigen::MatrixXd target_series(const PosteriorChain& chain, const TargetSpec& target) {
  if (chain.empty()) throw_error(ErrorKind::Usage, "empty chain");
  Eigen::MatrixXd series(chain.size(), target.arity());
  int row = 0;
  chain.for_each_state([&](const ParameterState& state) {
    series.row(row++) = eval_target(state, target).transpose();
  });
  return series;
}

Eigen::VectorXd chain_mean(const PosteriorChain& chain, const TargetSpec& target) {
  return target_series(chain, target).colwise().mean();
}

Eigen::VectorXd chain_variance(const PosteriorChain& chain, const TargetSpec& target) {
  const Eigen::MatrixXd series = target_series(chain, target);
  const Eigen::RowVectorXd mean = series.colwise().mean();
  const int n = static_cast<int>(series.rows());
  if (n < 2) return Eigen::VectorXd::Zero(series.cols());
  return (series.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(n - 1);
}

double series_ess(const Eigen::VectorXd& series) {
  const int n = static_cast<int>(series.size());
  if (n < 10) throw_error(ErrorKind::Usage, "ESS needs at least 10 draws");
  const double mean = series.mean();
  const Eigen::VectorXd centered = series.array() - mean;
  const double var = centered.squaredNorm() / n;
  if (var <= 0.0 || !std::isfinite(var)) return static_cast<double>(n);  // constant series

  auto autocvar = [&](int lag) {
    double acc = 0.0;
    for (int t = 0; t + lag < n; ++t) acc += centered[t] * centered[t + lag];
    return acc / n;
  };

  // Geyer initial positive sequence: sum consecutive-lag pairs while positive.
  double tau = 1.0;
  for (int lag = 1; lag + 1 < n; lag += 2) {
    const double pair = (autocvar(lag) + autocvar(lag + 1)) / var;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(n) / tau;
  return std::min(std::max(ess, 1e-12), static_cast<double>(n));
}

double effective_sample_size(const PosteriorChain& chain, const TargetSpec& target) {
  const Eigen::MatrixXd series = target_series(chain, target);
  double ess = static_cast<double>(series.rows());
  for (int k = 0; k < series.cols(); ++k) {
    ess = std::min(ess, series_ess(series.col(k)));
  }
  return ess;
}

Eigen::VectorXd chain_mc_error(const PosteriorChain& chain, const TargetSpec& target) {
  const Eigen::MatrixXd series = target_series(chain, target);
  const Eigen::RowVectorXd mean = series.colwise().mean();
  const int n = static_cast<int>(series.rows());
  Eigen::VectorXd se(series.cols());
  for (int k = 0; k < series.cols(); ++k) {
    const double var = (series.col(k).array() - mean[k]).square().sum() / std::max(1, n - 1);
    se[k] = std::sqrt(var / series_ess(series.col(k)));
  }
  return se;
}

}  // namespace voi

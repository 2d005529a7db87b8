#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voi/model.hpp"

namespace voi {

// Adaptive random-walk Metropolis-within-Gibbs configuration. Defaults give
// 15000 stored draws (60000 sweeps, half burn-in, thinning 2). Adadelta-style
// scale adaptation does not exist here: proposal scales follow Robbins-Monro
// toward 0.44 acceptance during burn-in only and freeze afterwards.
struct SamplerConfig {
  long iterations = 60000;
  double burn_in_fraction = 0.5;
  int thinning = 2;
  double default_scale = 0.5;
  std::map<std::string, double> block_scales;  // initial per-block proposal scales
  int adaptation_window = 50;                  // Robbins-Monro time offset
  int warmup_sweeps = 100;                     // sweeps before adaptation starts
  std::uint64_t seed = 0;

  long burn_in() const { return static_cast<long>(iterations * burn_in_fraction); }
  void validate() const;  // config error on violated invariants
  std::uint64_t hash() const;
};

// Where a chain came from: enough to refuse mixing chains across datasets
// and to key on-disk caches.
struct ChainProvenance {
  std::string format_version = "voikit-chain-1";
  std::string model_name;
  std::uint64_t dataset_hash = 0;           // the full dataset universe
  std::uint64_t conditioned_rows_hash = 0;  // exactly the rows conditioned on
  int conditioned_row_count = 0;
  std::string partition_label;  // "full", "loo:<label>", "prior", ...
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

// Thinned post-burn-in draws. All stored states are in-support.
class PosteriorChain {
 public:
  PosteriorChain() = default;
  PosteriorChain(LayoutPtr layout, std::vector<Eigen::VectorXd> draws, ChainProvenance provenance,
                 std::map<std::string, double> acceptance_rates);

  int size() const { return static_cast<int>(draws_.size()); }
  bool empty() const { return draws_.empty(); }
  const LayoutPtr& layout() const { return layout_; }
  const std::vector<Eigen::VectorXd>& draws() const { return draws_; }
  const ChainProvenance& provenance() const { return provenance_; }
  const std::map<std::string, double>& acceptance_rates() const { return acceptance_rates_; }

  ParameterState state(int i) const;  // copies draw i into a fresh state

  // Visits every draw through one reused state buffer.
  template <typename Fn>
  void for_each_state(Fn&& fn) const {
    ParameterState buffer = ParameterState::zeros(layout_);
    for (const Eigen::VectorXd& draw : draws_) {
      buffer.flat() = draw;
      fn(static_cast<const ParameterState&>(buffer));
    }
  }

 private:
  LayoutPtr layout_;
  std::vector<Eigen::VectorXd> draws_;
  ChainProvenance provenance_;
  std::map<std::string, double> acceptance_rates_;
};

// Draws a thinned posterior chain. Deterministic given (model, data, config,
// seed). `partition_label` is recorded as provenance. When the conditioning
// data is a subset of a larger dataset (leave-one-out fits), pass that
// universe's content hash so downstream provenance checks can line chains up;
// zero means "this data is the whole universe".
PosteriorChain sample_posterior(const Model& model, const Dataset& data,
                                const SamplerConfig& config,
                                const std::string& partition_label = "full",
                                std::uint64_t universe_hash = 0);

// Componentwise average of eval_target over draws. Usage error on empty.
Eigen::VectorXd chain_mean(const PosteriorChain& chain, const TargetSpec& target);
Eigen::VectorXd chain_variance(const PosteriorChain& chain, const TargetSpec& target);

// N x arity matrix of the target evaluated at every draw.
Eigen::MatrixXd target_series(const PosteriorChain& chain, const TargetSpec& target);

// Autocorrelation-based effective sample size (Geyer initial positive
// sequence), clipped to (0, N]. Vector targets report the minimum across
// components. A constant series reports N.
double effective_sample_size(const PosteriorChain& chain, const TargetSpec& target);
double series_ess(const Eigen::VectorXd& series);

// Monte Carlo standard error of the chain mean: sqrt(var / ESS) per
// component.
Eigen::VectorXd chain_mc_error(const PosteriorChain& chain, const TargetSpec& target);

}  // namespace voi

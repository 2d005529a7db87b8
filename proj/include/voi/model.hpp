#pragma once

#include <Eigen/Core>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "voi/data.hpp"
#include "voi/rng.hpp"
#include "voi/state.hpp"
#include "voi/target.hpp"

namespace voi {

// Log density with an explicit off-support signal, so Metropolis proposals
// can reject without exception machinery.
struct LogDensity {
  double value = -std::numeric_limits<double>::infinity();
  bool in_support = false;

  static LogDensity off_support() { return {}; }
  static LogDensity of(double v) { return {v, true}; }
};

// A model compiled against one dataset: row indices resolved, count bounds
// fixed. This is where the per-coordinate evaluation used by the sampler
// lives. Instances are immutable and safe to share across threads.
class BoundModel {
 public:
  virtual ~BoundModel() = default;

  virtual const LayoutPtr& layout() const = 0;

  // log prior + log likelihood of every bound row; off-support signalled.
  virtual LogDensity log_posterior(const ParameterState& state) const = 0;

  // Sum of exactly the terms that involve coordinate `coord` of block
  // `block`. Differences of this quantity drive single-site MH updates.
  // Default: the full log posterior (correct, slower).
  virtual double log_posterior_local(const ParameterState& state, int block, int coord) const;

  // Observation terms of the given rows only (no latent or prior terms).
  virtual double log_likelihood_rows(const ParameterState& state,
                                     std::span<const int> row_indices) const = 0;
};

// Language-neutral probabilistic-model contract. All operations are pure
// functions of their arguments.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;

  // Validates the dataset against the model schema and compiles it.
  virtual std::unique_ptr<BoundModel> bind(const Dataset& data) const = 0;

  // Convenience path through bind().
  LogDensity log_posterior(const ParameterState& state, const Dataset& data) const;

  // Simulated observations for exactly the pattern's cells, drawn from the
  // model's observation distributions given `state`. Metadata (sample sizes,
  // totals) is copied from the pattern unchanged.
  virtual std::vector<DataRow> simulate_predictive(const ParameterState& state,
                                                   std::span<const DataRow> pattern,
                                                   RngStream& rng) const = 0;

  // In-support starting state for the sampler. Prior draws retried until
  // in-support with respect to `data`.
  virtual ParameterState draw_initial(const Dataset& data, RngStream& rng) const = 0;

  virtual std::vector<TargetSpec> targets() const = 0;

  // E[target | nuisance blocks of state, data], the reduced-noise regression
  // response. Capability error when no computable conditional exists.
  virtual bool supports_conditional_mean(const TargetSpec& target) const;
  virtual Eigen::VectorXd conditional_mean_target(const ParameterState& state, const Dataset& data,
                                                  const TargetSpec& target) const;

  // How one observation cell enters a design matrix: column names per
  // pattern cell and the matching values for a simulated row. Default: the
  // raw observation value, one column per cell. Models with proportions or
  // size estimates map them onto their natural (logit/log) scales.
  virtual void design_columns(const DataRow& pattern_cell,
                              std::vector<std::string>& names) const;
  virtual void design_values(const DataRow& simulated_row, std::vector<double>& values) const;
};

// Builds pattern rows from a partition: the selected rows with observation
// values cleared and metadata (including population) filled in.
std::vector<DataRow> make_pattern(const Dataset& data, std::span<const int> row_indices);

}  // namespace voi

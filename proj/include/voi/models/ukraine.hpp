#pragma once

#include <map>
#include <optional>

#include "voi/model.hpp"

namespace voi {

inline const std::string kNetworkScaleUpSource = "network-scale-up";

// Structural configuration of the hierarchical population-size model:
// which sites, calendar years and multiplier subgroups exist. Population
// totals live in the dataset. Consecutive modeled years are one random-walk
// step apart regardless of calendar gaps.
struct UkraineConfig {
  std::vector<int> site_ids;
  std::vector<int> years;              // sorted calendar years
  std::vector<std::string> subgroups;  // multiplier sources

  // Accepted for completeness with the model's prior list but used by no
  // likelihood term (vestigial symbol); kept so configs round-trip.
  std::optional<double> sigma2_N;

  int site_count() const { return static_cast<int>(site_ids.size()); }
  int year_count() const { return static_cast<int>(years.size()); }
  int subgroup_count() const { return static_cast<int>(subgroups.size()); }
  int site_index(int site_id) const;          // data error when unknown
  int year_index(int year) const;             // data error when unknown
  int subgroup_index(const std::string&) const;  // -1 when unknown
  void validate() const;
};

// Hierarchical model for hard-to-reach population size estimation from
// multiplier and network scale-up data:
//   n_it ~ Binomial(R_it, pi_it)
//   logit(pi_i,t+1) ~ N(logit(pi_it) + phi_t, sigma2_pi), pi_i0 ~ Beta(a0, b0)
//   phi_t ~ N(0, sigma2_phi)
//   Y_ijt ~ Binomial(n_it, p_ijt)
//   p_ij0 ~ Beta(aj, bj); logit(p_ij,t+1) ~ N(logit(p_ijt) + eta_jt, sigma2_p)
//   eta_jt ~ N(0, sigma2_eta)
//   logit(P_ijt) = logit(p_ijt) + theta + delta_i + gamma_j + eps,
//       eps ~ N(0, sigma2_eps / G_ijt)
//   log(N_it) ~ N(log(n_it) + mu, tau S_it^2 / n_it^2)
// with priors mu ~ N(0,1), theta ~ N(0,10), beta pairs parameterized as
// mean ~ Uniform(0,1) and concentration ~ Gamma(.01,.01), and
// InverseGamma(.5,.5) on every variance parameter and tau.
class UkraineModel : public Model {
 public:
  explicit UkraineModel(UkraineConfig config);

  std::string name() const override { return "ukraine"; }
  std::unique_ptr<BoundModel> bind(const Dataset& data) const override;
  std::vector<DataRow> simulate_predictive(const ParameterState& state,
                                           std::span<const DataRow> pattern,
                                           RngStream& rng) const override;
  ParameterState draw_initial(const Dataset& data, RngStream& rng) const override;
  std::vector<TargetSpec> targets() const override;

  bool supports_conditional_mean(const TargetSpec& target) const override;
  Eigen::VectorXd conditional_mean_target(const ParameterState& state, const Dataset& data,
                                          const TargetSpec& target) const override;

  void design_columns(const DataRow& pattern_cell, std::vector<std::string>& names) const override;
  void design_values(const DataRow& simulated_row, std::vector<double>& values) const override;

  const UkraineConfig& config() const { return config_; }

  // Target lookup helpers: "theta", "mu", "l_<year>", and the all-years
  // vector "l_all".
  TargetSpec target_by_name(const std::string& name) const;

  LayoutPtr layout_for(const Dataset& data) const;

  // Flat indices into the state blocks.
  int pi_index(int site, int year_idx) const { return site * config_.year_count() + year_idx; }
  int p_index(int site, int subgroup, int year_idx) const {
    return (site * config_.subgroup_count() + subgroup) * config_.year_count() + year_idx;
  }

 private:
  UkraineConfig config_;
};

// Which (source, year) cells carry data and for how many sites, in the style
// of the published observation table; survey sizes and relative NSU errors
// fill the generator's metadata.
struct SyntheticSchedule {
  struct Cell {
    std::string source;
    int year = 0;
    int site_count = 0;  // the first `site_count` configured sites
  };
  std::vector<Cell> cells;
  double survey_size = 300.0;      // G for generated multiplier cells
  double nsu_rel_error = 0.2;      // S as a fraction of the latent count

  void validate(const UkraineConfig& config) const;  // config error on unknown source
};

// The default observation pattern: hospital estimates in 14 cities (2007)
// and 12 (2010) and 27 (2014, 2015), surveys in 14 (2009) and 27 (2013),
// one network scale-up round across all 27 cities (2008), and the remaining
// subgroup cells of the published schedule.
SyntheticSchedule default_schedule();
UkraineConfig default_config();

// Log-uniform populations between 1e4 and 1e6 per site, constant over years.
std::map<std::pair<int, int>, double> synthetic_populations(const UkraineConfig& config,
                                                            RngStream& rng);

// A generating state with moderate spread: hyperparameters at interpretable
// values, theta and mu drawn from their priors, latents from the hierarchy.
ParameterState synthetic_true_state(const UkraineModel& model, const Dataset& populations,
                                    RngStream& rng);

// Forward-simulates observations for every scheduled cell from `true_state`
// (Eqs. of the observation model), returning a dataset carrying the supplied
// population table.
Dataset generate_synthetic(const UkraineModel& model, const SyntheticSchedule& schedule,
                           const ParameterState& true_state, const Dataset& populations,
                           std::uint64_t seed);

// Convenience: dataset holding only a population table.
Dataset population_dataset(const std::map<std::pair<int, int>, double>& table);

}  // namespace voi

#include "voi/models/ukraine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "voi/errors.hpp"
#include "voi/special_functions.hpp"

namespace voi {

namespace {

constexpr double kLatentClamp = 1e-9;  // keeps simulated logits finite

double clamp_unit(double x) { return std::clamp(x, kLatentClamp, 1.0 - kLatentClamp); }

// Block names in layout order.
const char* kPi = "pi";
const char* kN = "n";
const char* kPhi = "phi";
const char* kBeta0Mean = "beta0_mean";
const char* kBeta0Conc = "beta0_conc";
const char* kP = "p";
const char* kBetajMean = "betaj_mean";
const char* kBetajConc = "betaj_conc";
const char* kEta = "eta";
const char* kTheta = "theta";
const char* kDelta = "delta";
const char* kGamma = "gamma";
const char* kMu = "mu";
const char* kSigma2Pi = "sigma2_pi";
const char* kSigma2Phi = "sigma2_phi";
const char* kSigma2P = "sigma2_p";
const char* kSigma2Eta = "sigma2_eta";
const char* kSigma2Delta = "sigma2_delta";
const char* kSigma2Gamma = "sigma2_gamma";
const char* kSigma2Eps = "sigma2_eps";
const char* kTau = "tau";

struct Blocks {
  int pi, n, phi, b0m, b0c, p, bjm, bjc, eta, theta, delta, gamma, mu;
  int s2pi, s2phi, s2p, s2eta, s2delta, s2gamma, s2eps, tau;

  explicit Blocks(const BlockLayout& layout)
      : pi(layout.index_of(kPi)),
        n(layout.index_of(kN)),
        phi(layout.index_of(kPhi)),
        b0m(layout.index_of(kBeta0Mean)),
        b0c(layout.index_of(kBeta0Conc)),
        p(layout.index_of(kP)),
        bjm(layout.index_of(kBetajMean)),
        bjc(layout.index_of(kBetajConc)),
        eta(layout.index_of(kEta)),
        theta(layout.index_of(kTheta)),
        delta(layout.index_of(kDelta)),
        gamma(layout.index_of(kGamma)),
        mu(layout.index_of(kMu)),
        s2pi(layout.index_of(kSigma2Pi)),
        s2phi(layout.index_of(kSigma2Phi)),
        s2p(layout.index_of(kSigma2P)),
        s2eta(layout.index_of(kSigma2Eta)),
        s2delta(layout.index_of(kSigma2Delta)),
        s2gamma(layout.index_of(kSigma2Gamma)),
        s2eps(layout.index_of(kSigma2Eps)),
        tau(layout.index_of(kTau)) {}
};

struct MultRow {
  int row = 0;  // index into the dataset
  int i = 0, j = 0, t = 0;
  double logit_P = 0.0, G = 1.0, Y = 0.0;
};

struct NsuRow {
  int row = 0;
  int i = 0, t = 0;
  double log_N = 0.0, S = 1.0;
};

}  // namespace

int UkraineConfig::site_index(int site_id) const {
  for (std::size_t i = 0; i < site_ids.size(); ++i) {
    if (site_ids[i] == site_id) return static_cast<int>(i);
  }
  throw_error(ErrorKind::Data, "row references undeclared site " + std::to_string(site_id));
}

int UkraineConfig::year_index(int year) const {
  for (std::size_t t = 0; t < years.size(); ++t) {
    if (years[t] == year) return static_cast<int>(t);
  }
  throw_error(ErrorKind::Data, "row references undeclared year " + std::to_string(year));
}

int UkraineConfig::subgroup_index(const std::string& name) const {
  for (std::size_t j = 0; j < subgroups.size(); ++j) {
    if (subgroups[j] == name) return static_cast<int>(j);
  }
  return -1;
}

void UkraineConfig::validate() const {
  if (site_ids.empty() || years.empty() || subgroups.empty()) {
    throw_error(ErrorKind::Config, "ukraine config needs sites, years and subgroups");
  }
  if (years.size() < 2) {
    throw_error(ErrorKind::Config, "ukraine config needs at least two modeled years");
  }
  if (!std::is_sorted(years.begin(), years.end())) {
    throw_error(ErrorKind::Config, "ukraine config years must be sorted");
  }
  std::set<int> unique_years(years.begin(), years.end());
  if (unique_years.size() != years.size()) {
    throw_error(ErrorKind::Config, "ukraine config years must be distinct");
  }
  std::set<std::string> unique_subs(subgroups.begin(), subgroups.end());
  if (unique_subs.size() != subgroups.size()) {
    throw_error(ErrorKind::Config, "ukraine config subgroups must be distinct");
  }
  if (unique_subs.count(kNetworkScaleUpSource)) {
    throw_error(ErrorKind::Config,
                "'" + kNetworkScaleUpSource + "' is reserved for scale-up rows");
  }
}

namespace {

class BoundUkraine : public BoundModel {
 public:
  BoundUkraine(const UkraineConfig& config, LayoutPtr layout, const Dataset& data)
      : config_(config), layout_(std::move(layout)), blocks_(*layout_) {
    const int S = config_.site_count();
    const int T = config_.year_count();
    const int J = config_.subgroup_count();
    R_.resize(S, T);
    for (int i = 0; i < S; ++i) {
      for (int t = 0; t < T; ++t) {
        R_(i, t) = data.population(config_.site_ids[static_cast<std::size_t>(i)],
                                   config_.years[static_cast<std::size_t>(t)]);
      }
    }
    mult_by_cell_.resize(static_cast<std::size_t>(S) * J * T);
    mult_by_site_year_.resize(static_cast<std::size_t>(S) * T);
    mult_by_site_.resize(static_cast<std::size_t>(S));
    mult_by_sub_.resize(static_cast<std::size_t>(J));
    nsu_by_site_year_.resize(static_cast<std::size_t>(S) * T);
    row_kind_.resize(static_cast<std::size_t>(data.size()), 0);
    row_pos_.resize(static_cast<std::size_t>(data.size()), -1);

    for (int r = 0; r < data.size(); ++r) {
      const DataRow& row = data.row(r);
      const int i = config_.site_index(row.site);
      const int t = config_.year_index(row.year);
      if (row.source == kNetworkScaleUpSource) {
        if (!(row.value > 0.0) || !(row.std_error > 0.0)) {
          throw_error(ErrorKind::Data, "scale-up row needs a positive estimate and std error");
        }
        NsuRow nr;
        nr.row = r;
        nr.i = i;
        nr.t = t;
        nr.log_N = std::log(row.value);
        nr.S = row.std_error;
        nsu_by_site_year_[static_cast<std::size_t>(i * T + t)].push_back(
            static_cast<int>(nsu_.size()));
        row_kind_[static_cast<std::size_t>(r)] = 2;
        row_pos_[static_cast<std::size_t>(r)] = static_cast<int>(nsu_.size());
        nsu_.push_back(nr);
      } else {
        const int j = config_.subgroup_index(row.source);
        if (j < 0) {
          throw_error(ErrorKind::Data, "row references undeclared subgroup '" + row.source + "'");
        }
        if (!(row.value > 0.0) || !(row.value < 1.0)) {
          throw_error(ErrorKind::Data, "multiplier row needs a proportion estimate in (0, 1)");
        }
        if (row.trials < 1.0) {
          throw_error(ErrorKind::Data, "multiplier row needs a survey size >= 1");
        }
        if (row.count < 0.0 || row.count != std::floor(row.count)) {
          throw_error(ErrorKind::Data, "multiplier row needs an integer subgroup count >= 0");
        }
        MultRow mr;
        mr.row = r;
        mr.i = i;
        mr.j = j;
        mr.t = t;
        mr.logit_P = logit(row.value);
        mr.G = row.trials;
        mr.Y = row.count;
        const int pos = static_cast<int>(mult_.size());
        mult_by_cell_[static_cast<std::size_t>((i * J + j) * T + t)].push_back(pos);
        mult_by_site_year_[static_cast<std::size_t>(i * T + t)].push_back(pos);
        mult_by_site_[static_cast<std::size_t>(i)].push_back(pos);
        mult_by_sub_[static_cast<std::size_t>(j)].push_back(pos);
        row_kind_[static_cast<std::size_t>(r)] = 1;
        row_pos_[static_cast<std::size_t>(r)] = pos;
        mult_.push_back(mr);
      }
    }
  }

  const LayoutPtr& layout() const override { return layout_; }

  // --- term evaluators -----------------------------------------------------

  double pi_at(const ParameterState& s, int i, int t) const {
    return s.get(blocks_.pi, i * config_.year_count() + t);
  }
  double n_at(const ParameterState& s, int i, int t) const {
    return s.get(blocks_.n, i * config_.year_count() + t);
  }
  double p_at(const ParameterState& s, int i, int j, int t) const {
    return s.get(blocks_.p,
                 (i * config_.subgroup_count() + j) * config_.year_count() + t);
  }

  double term_count(const ParameterState& s, int i, int t) const {
    return binomial_lpmf(n_at(s, i, t), R_(i, t), pi_at(s, i, t));
  }
  double term_pi_walk(const ParameterState& s, int i, int t) const {
    return normal_lpdf(logit(pi_at(s, i, t)),
                       logit(pi_at(s, i, t - 1)) + s.get(blocks_.phi, t - 1),
                       s.get(blocks_.s2pi, 0));
  }
  double term_phi_prior(const ParameterState& s, int t) const {
    return normal_lpdf(s.get(blocks_.phi, t), 0.0, s.get(blocks_.s2phi, 0));
  }
  double term_pi0(const ParameterState& s, int i) const {
    const double m = s.get(blocks_.b0m, 0), c = s.get(blocks_.b0c, 0);
    return beta_lpdf(pi_at(s, i, 0), m * c, (1.0 - m) * c);
  }
  double term_p0(const ParameterState& s, int i, int j) const {
    const double m = s.get(blocks_.bjm, j), c = s.get(blocks_.bjc, j);
    return beta_lpdf(p_at(s, i, j, 0), m * c, (1.0 - m) * c);
  }
  double term_p_walk(const ParameterState& s, int i, int j, int t) const {
    return normal_lpdf(logit(p_at(s, i, j, t)),
                       logit(p_at(s, i, j, t - 1)) +
                           s.get(blocks_.eta, j * (config_.year_count() - 1) + t - 1),
                       s.get(blocks_.s2p, 0));
  }
  double term_eta_prior(const ParameterState& s, int j, int t) const {
    return normal_lpdf(s.get(blocks_.eta, j * (config_.year_count() - 1) + t), 0.0,
                       s.get(blocks_.s2eta, 0));
  }
  double term_subgroup_count(const ParameterState& s, const MultRow& r) const {
    return binomial_lpmf(r.Y, n_at(s, r.i, r.t), p_at(s, r.i, r.j, r.t));
  }
  double term_proportion_obs(const ParameterState& s, const MultRow& r) const {
    const double mean = logit(p_at(s, r.i, r.j, r.t)) + s.get(blocks_.theta, 0) +
                        s.get(blocks_.delta, r.i) + s.get(blocks_.gamma, r.j);
    return normal_lpdf(r.logit_P, mean, s.get(blocks_.s2eps, 0) / r.G);
  }
  double term_scaleup_obs(const ParameterState& s, const NsuRow& r) const {
    const double n = n_at(s, r.i, r.t);
    if (!(n >= 1.0)) return kNegInf;
    return normal_lpdf(r.log_N, std::log(n) + s.get(blocks_.mu, 0),
                       s.get(blocks_.tau, 0) * r.S * r.S / (n * n));
  }

  double latent_and_prior_terms(const ParameterState& s) const {
    const int S = config_.site_count();
    const int T = config_.year_count();
    const int J = config_.subgroup_count();
    double lp = 0.0;
    for (int i = 0; i < S; ++i) {
      lp += term_pi0(s, i);
      for (int t = 0; t < T; ++t) {
        lp += term_count(s, i, t);
        if (t >= 1) lp += term_pi_walk(s, i, t);
      }
      for (int j = 0; j < J; ++j) {
        lp += term_p0(s, i, j);
        for (int t = 1; t < T; ++t) lp += term_p_walk(s, i, j, t);
      }
      lp += normal_lpdf(s.get(blocks_.delta, i), 0.0, s.get(blocks_.s2delta, 0));
    }
    for (int t = 0; t + 1 < T; ++t) lp += term_phi_prior(s, t);
    for (int j = 0; j < J; ++j) {
      for (int t = 0; t + 1 < T; ++t) lp += term_eta_prior(s, j, t);
      lp += normal_lpdf(s.get(blocks_.gamma, j), 0.0, s.get(blocks_.s2gamma, 0));
      lp += gamma_lpdf(s.get(blocks_.bjc, j), 0.01, 0.01);
    }
    lp += gamma_lpdf(s.get(blocks_.b0c, 0), 0.01, 0.01);
    lp += normal_lpdf(s.get(blocks_.mu, 0), 0.0, 1.0);
    lp += normal_lpdf(s.get(blocks_.theta, 0), 0.0, 10.0);
    for (int b : {blocks_.s2pi, blocks_.s2phi, blocks_.s2p, blocks_.s2eta, blocks_.s2delta,
                  blocks_.s2gamma, blocks_.s2eps, blocks_.tau}) {
      lp += inv_gamma_lpdf(s.get(b, 0), 0.5, 0.5);
    }
    return lp;
  }

  LogDensity log_posterior(const ParameterState& state) const override {
    if (!state.layout().same_shape(*layout_)) {
      throw_error(ErrorKind::Schema, "state does not match the ukraine layout");
    }
    if (!state.in_declared_support()) return LogDensity::off_support();
    double lp = latent_and_prior_terms(state);
    for (const MultRow& r : mult_) {
      lp += term_subgroup_count(state, r) + term_proportion_obs(state, r);
    }
    for (const NsuRow& r : nsu_) lp += term_scaleup_obs(state, r);
    return LogDensity::of(lp);
  }

  double log_likelihood_rows(const ParameterState& state,
                             std::span<const int> row_indices) const override {
    double ll = 0.0;
    for (int r : row_indices) {
      if (r < 0 || r >= static_cast<int>(row_kind_.size())) {
        throw_error(ErrorKind::Usage, "row index out of range");
      }
      const int pos = row_pos_[static_cast<std::size_t>(r)];
      if (row_kind_[static_cast<std::size_t>(r)] == 1) {
        ll += term_subgroup_count(state, mult_[static_cast<std::size_t>(pos)]) +
              term_proportion_obs(state, mult_[static_cast<std::size_t>(pos)]);
      } else {
        ll += term_scaleup_obs(state, nsu_[static_cast<std::size_t>(pos)]);
      }
    }
    return ll;
  }

  // Exactly the terms touching one coordinate; differences drive MH updates.
  double log_posterior_local(const ParameterState& s, int block, int coord) const override {
    const int T = config_.year_count();
    const int J = config_.subgroup_count();
    double lp = 0.0;
    if (block == blocks_.pi) {
      const int i = coord / T, t = coord % T;
      lp += term_count(s, i, t);
      if (t == 0) lp += term_pi0(s, i);
      if (t >= 1) lp += term_pi_walk(s, i, t);
      if (t + 1 < T) lp += term_pi_walk(s, i, t + 1);
    } else if (block == blocks_.n) {
      const int i = coord / T, t = coord % T;
      lp += term_count(s, i, t);
      for (int pos : mult_by_site_year_[static_cast<std::size_t>(coord)]) {
        lp += term_subgroup_count(s, mult_[static_cast<std::size_t>(pos)]);
      }
      for (int pos : nsu_by_site_year_[static_cast<std::size_t>(coord)]) {
        lp += term_scaleup_obs(s, nsu_[static_cast<std::size_t>(pos)]);
      }
    } else if (block == blocks_.phi) {
      const int t = coord;
      lp += term_phi_prior(s, t);
      for (int i = 0; i < config_.site_count(); ++i) lp += term_pi_walk(s, i, t + 1);
    } else if (block == blocks_.b0m || block == blocks_.b0c) {
      for (int i = 0; i < config_.site_count(); ++i) lp += term_pi0(s, i);
      lp += gamma_lpdf(s.get(blocks_.b0c, 0), 0.01, 0.01);
    } else if (block == blocks_.p) {
      const int t = coord % T;
      const int ij = coord / T;
      const int i = ij / J, j = ij % J;
      if (t == 0) lp += term_p0(s, i, j);
      if (t >= 1) lp += term_p_walk(s, i, j, t);
      if (t + 1 < T) lp += term_p_walk(s, i, j, t + 1);
      for (int pos : mult_by_cell_[static_cast<std::size_t>(coord)]) {
        lp += term_subgroup_count(s, mult_[static_cast<std::size_t>(pos)]) +
              term_proportion_obs(s, mult_[static_cast<std::size_t>(pos)]);
      }
    } else if (block == blocks_.bjm || block == blocks_.bjc) {
      const int j = coord;
      for (int i = 0; i < config_.site_count(); ++i) lp += term_p0(s, i, j);
      lp += gamma_lpdf(s.get(blocks_.bjc, j), 0.01, 0.01);
    } else if (block == blocks_.eta) {
      const int j = coord / (T - 1), t = coord % (T - 1);
      lp += term_eta_prior(s, j, t);
      for (int i = 0; i < config_.site_count(); ++i) lp += term_p_walk(s, i, j, t + 1);
    } else if (block == blocks_.theta) {
      for (const MultRow& r : mult_) lp += term_proportion_obs(s, r);
      lp += normal_lpdf(s.get(blocks_.theta, 0), 0.0, 10.0);
    } else if (block == blocks_.delta) {
      for (int pos : mult_by_site_[static_cast<std::size_t>(coord)]) {
        lp += term_proportion_obs(s, mult_[static_cast<std::size_t>(pos)]);
      }
      lp += normal_lpdf(s.get(blocks_.delta, coord), 0.0, s.get(blocks_.s2delta, 0));
    } else if (block == blocks_.gamma) {
      for (int pos : mult_by_sub_[static_cast<std::size_t>(coord)]) {
        lp += term_proportion_obs(s, mult_[static_cast<std::size_t>(pos)]);
      }
      lp += normal_lpdf(s.get(blocks_.gamma, coord), 0.0, s.get(blocks_.s2gamma, 0));
    } else if (block == blocks_.mu) {
      for (const NsuRow& r : nsu_) lp += term_scaleup_obs(s, r);
      lp += normal_lpdf(s.get(blocks_.mu, 0), 0.0, 1.0);
    } else if (block == blocks_.s2pi) {
      for (int i = 0; i < config_.site_count(); ++i) {
        for (int t = 1; t < T; ++t) lp += term_pi_walk(s, i, t);
      }
      lp += inv_gamma_lpdf(s.get(blocks_.s2pi, 0), 0.5, 0.5);
    } else if (block == blocks_.s2phi) {
      for (int t = 0; t + 1 < T; ++t) lp += term_phi_prior(s, t);
      lp += inv_gamma_lpdf(s.get(blocks_.s2phi, 0), 0.5, 0.5);
    } else if (block == blocks_.s2p) {
      for (int i = 0; i < config_.site_count(); ++i) {
        for (int j = 0; j < J; ++j) {
          for (int t = 1; t < T; ++t) lp += term_p_walk(s, i, j, t);
        }
      }
      lp += inv_gamma_lpdf(s.get(blocks_.s2p, 0), 0.5, 0.5);
    } else if (block == blocks_.s2eta) {
      for (int j = 0; j < J; ++j) {
        for (int t = 0; t + 1 < T; ++t) lp += term_eta_prior(s, j, t);
      }
      lp += inv_gamma_lpdf(s.get(blocks_.s2eta, 0), 0.5, 0.5);
    } else if (block == blocks_.s2delta) {
      for (int i = 0; i < config_.site_count(); ++i) {
        lp += normal_lpdf(s.get(blocks_.delta, i), 0.0, s.get(blocks_.s2delta, 0));
      }
      lp += inv_gamma_lpdf(s.get(blocks_.s2delta, 0), 0.5, 0.5);
    } else if (block == blocks_.s2gamma) {
      for (int j = 0; j < J; ++j) {
        lp += normal_lpdf(s.get(blocks_.gamma, j), 0.0, s.get(blocks_.s2gamma, 0));
      }
      lp += inv_gamma_lpdf(s.get(blocks_.s2gamma, 0), 0.5, 0.5);
    } else if (block == blocks_.s2eps) {
      for (const MultRow& r : mult_) lp += term_proportion_obs(s, r);
      lp += inv_gamma_lpdf(s.get(blocks_.s2eps, 0), 0.5, 0.5);
    } else if (block == blocks_.tau) {
      for (const NsuRow& r : nsu_) lp += term_scaleup_obs(s, r);
      lp += inv_gamma_lpdf(s.get(blocks_.tau, 0), 0.5, 0.5);
    } else {
      throw_error(ErrorKind::Schema, "unknown block index in local evaluation");
    }
    return lp;
  }

  const Eigen::MatrixXd& populations() const { return R_; }
  const std::vector<MultRow>& mult_rows() const { return mult_; }
  const std::vector<NsuRow>& nsu_rows() const { return nsu_; }
  const Blocks& blocks() const { return blocks_; }

 private:
  UkraineConfig config_;
  LayoutPtr layout_;
  Blocks blocks_;
  Eigen::MatrixXd R_;
  std::vector<MultRow> mult_;
  std::vector<NsuRow> nsu_;
  std::vector<std::vector<int>> mult_by_cell_;
  std::vector<std::vector<int>> mult_by_site_year_;
  std::vector<std::vector<int>> mult_by_site_;
  std::vector<std::vector<int>> mult_by_sub_;
  std::vector<std::vector<int>> nsu_by_site_year_;
  std::vector<char> row_kind_;
  std::vector<int> row_pos_;
};

}  // namespace

UkraineModel::UkraineModel(UkraineConfig config) : config_(std::move(config)) {
  config_.validate();
}

LayoutPtr UkraineModel::layout_for(const Dataset& data) const {
  const int S = config_.site_count();
  const int T = config_.year_count();
  const int J = config_.subgroup_count();

  // Count bounds: latent n_it at least the largest observed subgroup total
  // (and 1 under a scale-up observation), at most the known population.
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(S * T);
  Eigen::VectorXd upper(S * T);
  for (int i = 0; i < S; ++i) {
    for (int t = 0; t < T; ++t) {
      upper[i * T + t] = data.population(config_.site_ids[static_cast<std::size_t>(i)],
                                         config_.years[static_cast<std::size_t>(t)]);
    }
  }
  for (const DataRow& row : data.rows()) {
    const int i = config_.site_index(row.site);
    const int t = config_.year_index(row.year);
    const int cell = i * T + t;
    if (row.source == kNetworkScaleUpSource) {
      lower[cell] = std::max(lower[cell], 1.0);
    } else {
      lower[cell] = std::max(lower[cell], row.count);
    }
  }

  std::vector<BlockSpec> blocks;
  blocks.push_back(BlockSpec::unit_interval(kPi, S * T));
  blocks.push_back(BlockSpec::count(kN, lower, upper));
  blocks.push_back(BlockSpec::real(kPhi, T - 1));
  blocks.push_back(BlockSpec::unit_interval(kBeta0Mean));
  blocks.push_back(BlockSpec::positive(kBeta0Conc));
  blocks.push_back(BlockSpec::unit_interval(kP, S * J * T));
  blocks.push_back(BlockSpec::unit_interval(kBetajMean, J));
  blocks.push_back(BlockSpec::positive(kBetajConc, J));
  blocks.push_back(BlockSpec::real(kEta, J * (T - 1)));
  blocks.push_back(BlockSpec::real(kTheta));
  blocks.push_back(BlockSpec::real(kDelta, S));
  blocks.push_back(BlockSpec::real(kGamma, J));
  blocks.push_back(BlockSpec::real(kMu));
  for (const char* name : {kSigma2Pi, kSigma2Phi, kSigma2P, kSigma2Eta, kSigma2Delta,
                           kSigma2Gamma, kSigma2Eps, kTau}) {
    blocks.push_back(BlockSpec::positive(name));
  }
  return std::make_shared<BlockLayout>(std::move(blocks));
}

std::unique_ptr<BoundModel> UkraineModel::bind(const Dataset& data) const {
  data.validate_unique_keys();
  return std::make_unique<BoundUkraine>(config_, layout_for(data), data);
}

namespace {

// Latents for pattern cells outside the fitted state: future years extend the
// random walks one step per requested year; unknown subgroups draw their
// subgroup-level parameters fresh (their priors and hierarchy), which is what
// makes never-observed sources weakly informative.
struct PredictiveContext {
  const UkraineConfig& config;
  const ParameterState& state;
  const Blocks& blocks;
  RngStream& rng;

  std::vector<int> ext_years;                       // sorted, beyond the last modeled year
  std::vector<double> ext_phi;                      // one step per extension year
  std::map<std::pair<int, int>, double> ext_pi;     // (site idx, step) -> pi
  std::map<std::pair<int, int>, double> ext_n;      // (site idx, step) -> n
  std::map<int, std::vector<double>> ext_eta;       // subgroup -> per-step drift
  std::map<std::pair<int, int>, double> ext_p;      // (site*J+j, step) -> p

  struct NewSource {
    double mean = 0.5, conc = 1.0, gamma = 0.0;
    std::vector<double> eta;                        // all transitions incl. extensions
    std::map<std::pair<int, int>, double> p;        // (site idx, year step 0..T-1+E) -> p
  };
  std::map<std::string, NewSource> new_sources;
  std::map<std::pair<int, int>, double> ext_population;  // (site idx, step) -> R

  int year_step(int year) const {  // index in the extended year axis
    for (std::size_t t = 0; t < config.years.size(); ++t) {
      if (config.years[t] == year) return static_cast<int>(t);
    }
    for (std::size_t e = 0; e < ext_years.size(); ++e) {
      if (ext_years[e] == year) return config.year_count() + static_cast<int>(e);
    }
    throw_error(ErrorKind::Data, "pattern references unprepared year " + std::to_string(year));
  }
};

void prepare_context(PredictiveContext& ctx, std::span<const DataRow> pattern) {
  const UkraineConfig& config = ctx.config;
  const ParameterState& s = ctx.state;
  const Blocks& blocks = ctx.blocks;
  const int T = config.year_count();
  const int J = config.subgroup_count();

  std::set<int> future;
  for (const DataRow& cell : pattern) {
    if (cell.year > config.years.back()) future.insert(cell.year);
    (void)config.site_index(cell.site);  // unknown sites are data errors
  }
  ctx.ext_years.assign(future.begin(), future.end());
  const int E = static_cast<int>(ctx.ext_years.size());

  const double s2phi = s.get(blocks.s2phi, 0);
  const double s2pi = s.get(blocks.s2pi, 0);
  const double s2eta = s.get(blocks.s2eta, 0);
  const double s2p = s.get(blocks.s2p, 0);

  for (int e = 0; e < E; ++e) ctx.ext_phi.push_back(ctx.rng.normal(0.0, std::sqrt(s2phi)));
  for (int j = 0; j < J; ++j) {
    std::vector<double>& eta = ctx.ext_eta[j];
    for (int e = 0; e < E; ++e) eta.push_back(ctx.rng.normal(0.0, std::sqrt(s2eta)));
  }

  // population per extended (site, step), from pattern metadata
  for (const DataRow& cell : pattern) {
    if (cell.year <= config.years.back()) continue;
    const int i = config.site_index(cell.site);
    const int step = ctx.year_step(cell.year) - T;
    if (cell.population >= 1.0) {
      ctx.ext_population.emplace(std::make_pair(i, step), cell.population);
    }
  }

  // site-level prevalence and count paths for extension steps; counts are
  // drawn only where a cell supplies the future population
  std::map<int, int> site_max_step;
  for (const DataRow& cell : pattern) {
    if (cell.year <= config.years.back()) continue;
    const int i = config.site_index(cell.site);
    const int step = ctx.year_step(cell.year) - T;
    auto [it, inserted] = site_max_step.emplace(i, step);
    if (!inserted) it->second = std::max(it->second, step);
  }
  for (const auto& [i, max_step] : site_max_step) {
    double lo = logit(s.get(blocks.pi, i * T + (T - 1)));
    for (int e = 0; e <= max_step; ++e) {
      lo = ctx.rng.normal(lo + ctx.ext_phi[static_cast<std::size_t>(e)], std::sqrt(s2pi));
      const double pi = clamp_unit(sigmoid(lo));
      ctx.ext_pi[{i, e}] = pi;
      auto pop_it = ctx.ext_population.find({i, e});
      if (pop_it != ctx.ext_population.end()) {
        ctx.ext_n[{i, e}] = std::max<double>(
            1.0, static_cast<double>(
                     ctx.rng.binomial(static_cast<long long>(pop_it->second), pi)));
      }
    }
  }

  // subgroup proportion paths for extension steps (known subgroups)
  std::map<int, int> cell_max_step;  // (i*J+j) -> furthest step
  for (const DataRow& cell : pattern) {
    if (cell.year <= config.years.back()) continue;
    if (cell.source == kNetworkScaleUpSource) continue;
    const int j = config.subgroup_index(cell.source);
    if (j < 0) continue;  // new sources handled below
    const int ij = config.site_index(cell.site) * J + j;
    const int step = ctx.year_step(cell.year) - T;
    auto [it, inserted] = cell_max_step.emplace(ij, step);
    if (!inserted) it->second = std::max(it->second, step);
  }
  for (const auto& [ij, max_step] : cell_max_step) {
    const int j = ij % J;
    double lo = logit(s.get(blocks.p, ij * T + (T - 1)));
    for (int e = 0; e <= max_step; ++e) {
      lo = ctx.rng.normal(lo + ctx.ext_eta[j][static_cast<std::size_t>(e)], std::sqrt(s2p));
      ctx.ext_p[{ij, e}] = clamp_unit(sigmoid(lo));
    }
  }

  // brand-new sources: subgroup-level parameters from their priors/hierarchy
  const double s2gamma = s.get(blocks.s2gamma, 0);
  for (const DataRow& cell : pattern) {
    if (cell.source == kNetworkScaleUpSource) continue;
    if (config.subgroup_index(cell.source) >= 0) continue;
    if (ctx.new_sources.count(cell.source)) continue;
    PredictiveContext::NewSource ns;
    ns.mean = ctx.rng.uniform();
    // concentration floored: raw Gamma(.01,.01) draws underflow Beta latents
    do {
      ns.conc = ctx.rng.gamma(0.01, 0.01);
    } while (ns.conc < 0.01);
    ns.gamma = ctx.rng.normal(0.0, std::sqrt(s2gamma));
    for (int t = 0; t + 1 < T + E; ++t) {
      ns.eta.push_back(ctx.rng.normal(0.0, std::sqrt(s2eta)));
    }
    ctx.new_sources[cell.source] = std::move(ns);
  }
  // new-source proportion paths for every site that needs them
  for (const DataRow& cell : pattern) {
    auto it = ctx.new_sources.find(cell.source);
    if (it == ctx.new_sources.end()) continue;
    PredictiveContext::NewSource& ns = it->second;
    const int i = config.site_index(cell.site);
    const int step = ctx.year_step(cell.year);
    if (ns.p.count({i, 0}) == 0) {
      const double a = ns.mean * ns.conc, b = (1.0 - ns.mean) * ns.conc;
      ns.p[{i, 0}] = clamp_unit(ctx.rng.beta(a, b));
    }
    int have = 0;
    while (ns.p.count({i, have + 1}) && have + 1 <= step) have += 1;
    for (int t = have; t < step; ++t) {
      const double lo = logit(ns.p[{i, t}]) + ns.eta[static_cast<std::size_t>(t)];
      ns.p[{i, t + 1}] = clamp_unit(sigmoid(ctx.rng.normal(lo, std::sqrt(s2p))));
    }
  }
}

}  // namespace

std::vector<DataRow> UkraineModel::simulate_predictive(const ParameterState& state,
                                                       std::span<const DataRow> pattern,
                                                       RngStream& rng) const {
  if (pattern.empty()) return {};
  const Blocks blocks(state.layout());
  const int T = config_.year_count();

  PredictiveContext ctx{config_, state, blocks, rng, {}, {}, {}, {}, {}, {}, {}, {}};
  prepare_context(ctx, pattern);

  auto latent_n = [&](int i, int step) {
    if (step < T) return state.get(blocks.n, i * T + step);
    auto it = ctx.ext_n.find({i, step - T});
    if (it == ctx.ext_n.end()) {
      throw_error(ErrorKind::Data, "pattern cell for a future year is missing its population");
    }
    return it->second;
  };

  std::vector<DataRow> out;
  out.reserve(pattern.size());
  for (const DataRow& cell : pattern) {
    DataRow row = cell;
    const int i = config_.site_index(cell.site);
    const int step = ctx.year_step(cell.year);
    if (cell.source == kNetworkScaleUpSource) {
      if (!(cell.std_error > 0.0)) {
        throw_error(ErrorKind::Data, "scale-up pattern cell is missing its std error");
      }
      const double n = std::max(1.0, latent_n(i, step));
      const double sd =
          std::sqrt(state.get(blocks.tau, 0)) * cell.std_error / n;
      row.value = std::exp(rng.normal(std::log(n) + state.get(blocks.mu, 0), sd));
    } else {
      if (cell.trials < 1.0) {
        throw_error(ErrorKind::Data, "multiplier pattern cell is missing its survey size");
      }
      const int j = config_.subgroup_index(cell.source);
      double p, bias_gamma;
      if (j >= 0) {
        p = step < T ? state.get(blocks.p, (i * config_.subgroup_count() + j) * T + step)
                     : ctx.ext_p.at({i * config_.subgroup_count() + j, step - T});
        bias_gamma = state.get(blocks.gamma, j);
      } else {
        const PredictiveContext::NewSource& ns = ctx.new_sources.at(cell.source);
        p = ns.p.at({i, step});
        bias_gamma = ns.gamma;
      }
      const double n = latent_n(i, step);
      row.count = static_cast<double>(rng.binomial(static_cast<long long>(n), p));
      const double mean = logit(p) + state.get(blocks.theta, 0) + state.get(blocks.delta, i) +
                          bias_gamma;
      const double sd = std::sqrt(state.get(blocks.s2eps, 0) / cell.trials);
      row.value = clamp_unit(sigmoid(rng.normal(mean, sd)));
    }
    out.push_back(std::move(row));
  }
  return out;
}

ParameterState UkraineModel::draw_initial(const Dataset& data, RngStream& rng) const {
  const LayoutPtr layout = layout_for(data);
  const Blocks blocks(*layout);
  ParameterState s = ParameterState::zeros(layout);
  const int S = config_.site_count();
  const int T = config_.year_count();
  const int J = config_.subgroup_count();

  // Moderate hierarchy draws: the exact Gamma(.01,.01) concentration prior
  // underflows Beta latents to 0/1 in floating point essentially always, so
  // initialization tempers the hyperpriors and lets burn-in do the rest.
  for (int b : {blocks.s2pi, blocks.s2phi, blocks.s2p, blocks.s2eta, blocks.s2delta,
                blocks.s2gamma, blocks.s2eps, blocks.tau}) {
    s.set(b, 0, std::exp(rng.uniform(std::log(0.05), std::log(0.5))));
  }
  s.set(blocks.tau, 0, std::exp(rng.uniform(std::log(0.5), std::log(2.0))));
  s.set(blocks.b0m, 0, rng.uniform(0.005, 0.2));
  s.set(blocks.b0c, 0, rng.uniform(10.0, 100.0));
  for (int j = 0; j < J; ++j) {
    s.set(blocks.bjm, j, rng.uniform(0.05, 0.6));
    s.set(blocks.bjc, j, rng.uniform(5.0, 50.0));
    s.set(blocks.gamma, j, rng.normal(0.0, std::sqrt(s.get(blocks.s2gamma, 0))));
  }
  for (int t = 0; t + 1 < T; ++t) {
    s.set(blocks.phi, t, rng.normal(0.0, std::sqrt(s.get(blocks.s2phi, 0))));
  }
  for (int i = 0; i < S; ++i) {
    s.set(blocks.delta, i, rng.normal(0.0, std::sqrt(s.get(blocks.s2delta, 0))));
  }
  s.set(blocks.theta, 0, rng.normal(0.0, 1.0));
  s.set(blocks.mu, 0, rng.normal(0.0, 0.5));

  const double s2pi = s.get(blocks.s2pi, 0);
  const double s2p = s.get(blocks.s2p, 0);
  for (int i = 0; i < S; ++i) {
    double pi = clamp_unit(rng.beta(s.get(blocks.b0m, 0) * s.get(blocks.b0c, 0),
                                    (1.0 - s.get(blocks.b0m, 0)) * s.get(blocks.b0c, 0)));
    for (int t = 0; t < T; ++t) {
      if (t > 0) {
        pi = clamp_unit(
            sigmoid(rng.normal(logit(pi) + s.get(blocks.phi, t - 1), std::sqrt(s2pi))));
      }
      s.set(blocks.pi, i * T + t, pi);
      const BlockSpec& n_spec = layout->spec(blocks.n);
      const double lower = n_spec.lower[i * T + t];
      const double upper = n_spec.upper[i * T + t];
      double n = static_cast<double>(rng.binomial(static_cast<long long>(upper), pi));
      s.set(blocks.n, i * T + t, std::clamp(n, lower, upper));
    }
    for (int j = 0; j < J; ++j) {
      double p = clamp_unit(rng.beta(s.get(blocks.bjm, j) * s.get(blocks.bjc, j),
                                     (1.0 - s.get(blocks.bjm, j)) * s.get(blocks.bjc, j)));
      for (int t = 0; t < T; ++t) {
        if (t > 0) {
          const double drift = s.get(blocks.eta, j * (T - 1) + t - 1);
          p = clamp_unit(sigmoid(rng.normal(logit(p) + drift, std::sqrt(s2p))));
        }
        s.set(blocks.p, (i * J + j) * T + t, p);
      }
    }
  }
  for (int j = 0; j < J; ++j) {
    for (int t = 0; t + 1 < T; ++t) {
      s.set(blocks.eta, j * (T - 1) + t, rng.normal(0.0, std::sqrt(s.get(blocks.s2eta, 0))));
    }
  }
  return s;
}

std::vector<TargetSpec> UkraineModel::targets() const {
  std::vector<TargetSpec> out;
  out.push_back(TargetSpec::scalar_block(kTheta));
  out.push_back(TargetSpec::scalar_block(kMu));

  const int T = config_.year_count();
  auto l_value = [](const ParameterState& s, int upto) {
    const double m = s.scalar(kBeta0Mean);
    const double c = s.scalar(kBeta0Conc);
    double l = digamma(m * c) - digamma((1.0 - m) * c);
    const auto phi = s.block(kPhi);
    for (int t = 0; t < upto; ++t) l += phi[t];
    return l;
  };

  for (int t = 0; t < T; ++t) {
    TargetSpec spec;
    spec.name = "l_" + std::to_string(config_.years[static_cast<std::size_t>(t)]);
    spec.components = {spec.name};
    spec.target_blocks = {kBeta0Mean, kBeta0Conc, kPhi};
    spec.evaluate = [l_value, t](const ParameterState& s) {
      Eigen::VectorXd v(1);
      v[0] = l_value(s, t);
      return v;
    };
    out.push_back(std::move(spec));
  }

  TargetSpec all;
  all.name = "l_all";
  for (int t = 0; t < T; ++t) {
    all.components.push_back("l_" + std::to_string(config_.years[static_cast<std::size_t>(t)]));
  }
  all.target_blocks = {kBeta0Mean, kBeta0Conc, kPhi};
  all.evaluate = [l_value, T](const ParameterState& s) {
    Eigen::VectorXd v(T);
    for (int t = 0; t < T; ++t) v[t] = l_value(s, t);
    return v;
  };
  out.push_back(std::move(all));
  return out;
}

TargetSpec UkraineModel::target_by_name(const std::string& name) const {
  for (const TargetSpec& t : targets()) {
    if (t.name == name) return t;
  }
  throw_error(ErrorKind::Config, "unknown ukraine target '" + name + "'");
}

bool UkraineModel::supports_conditional_mean(const TargetSpec& target) const {
  if (target.name == "theta" || target.name == "mu") return true;
  const bool is_l = target.name.rfind("l_", 0) == 0;
  // the (a0, b0) conditional needs at least two sites to be proper
  return is_l && config_.site_count() >= 2;
}

namespace {

// E[digamma(a0) - digamma(b0) | pi_{.,0}] by 2-D quadrature over
// (logit mean, log concentration). The conditional has no closed form; this
// deterministic integral plays the Gibbs-conditional role.
double expected_initial_logit_mean(const Eigen::VectorXd& pi0) {
  auto log_kernel = [&](double u, double v) {
    const double m = sigmoid(u);
    const double c = std::exp(v);
    const double a = m * c, b = (1.0 - m) * c;
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      return kNegInf;
    }
    double lk = gamma_lpdf(c, 0.01, 0.01) + std::log(m) + std::log1p(-m) + v;
    for (int i = 0; i < pi0.size(); ++i) lk += beta_lpdf(pi0[i], a, b);
    return lk;
  };
  auto f = [&](double u, double v) {
    const double m = sigmoid(u);
    const double c = std::exp(v);
    return digamma(m * c) - digamma((1.0 - m) * c);
  };

  // mode search: coordinate golden sections from a moment-matched start
  const double mean_pi = std::clamp(pi0.mean(), 1e-6, 1.0 - 1e-6);
  double u = logit(mean_pi), v = std::log(10.0);
  const double phi_ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (int dim = 0; dim < 2; ++dim) {
      double lo = (dim == 0 ? u : v) - 20.0, hi = (dim == 0 ? u : v) + 20.0;
      double x1 = hi - phi_ratio * (hi - lo), x2 = lo + phi_ratio * (hi - lo);
      auto eval = [&](double x) { return dim == 0 ? log_kernel(x, v) : log_kernel(u, x); };
      double f1 = eval(x1), f2 = eval(x2);
      for (int it = 0; it < 50; ++it) {
        if (f1 > f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi_ratio * (hi - lo);
          f1 = eval(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi_ratio * (hi - lo);
          f2 = eval(x2);
        }
      }
      (dim == 0 ? u : v) = 0.5 * (lo + hi);
    }
  }

  // curvature-scaled trapezoid grid
  const double peak = log_kernel(u, v);
  const double h = 1e-3;
  const double duu = (log_kernel(u + h, v) - 2.0 * peak + log_kernel(u - h, v)) / (h * h);
  const double dvv = (log_kernel(u, v + h) - 2.0 * peak + log_kernel(u, v - h)) / (h * h);
  const double sd_u = duu < 0.0 ? 1.0 / std::sqrt(-duu) : 2.0;
  const double sd_v = dvv < 0.0 ? 1.0 / std::sqrt(-dvv) : 2.0;

  const int grid = 48;
  const double span = 7.0;
  double weight_sum = 0.0, value_sum = 0.0;
  for (int a = 0; a < grid; ++a) {
    const double uu = u + span * sd_u * (2.0 * a / (grid - 1.0) - 1.0);
    for (int b = 0; b < grid; ++b) {
      const double vv = v + span * sd_v * (2.0 * b / (grid - 1.0) - 1.0);
      const double w = std::exp(log_kernel(uu, vv) - peak);
      if (w > 0.0 && std::isfinite(w)) {
        weight_sum += w;
        value_sum += w * f(uu, vv);
      }
    }
  }
  if (!(weight_sum > 0.0)) return f(u, v);
  return value_sum / weight_sum;
}

}  // namespace

Eigen::VectorXd UkraineModel::conditional_mean_target(const ParameterState& state,
                                                      const Dataset& data,
                                                      const TargetSpec& target) const {
  if (!supports_conditional_mean(target)) {
    return Model::conditional_mean_target(state, data, target);
  }
  const Blocks blocks(state.layout());
  const int T = config_.year_count();

  if (target.name == "theta") {
    // Gaussian conditional: every proportion-estimate residual plus the
    // N(0, 10) prior.
    const std::unique_ptr<BoundModel> bound_base = bind(data);
    const auto* bound = static_cast<const BoundUkraine*>(bound_base.get());
    const double s2eps = state.get(blocks.s2eps, 0);
    double precision = 1.0 / 10.0;
    double weighted = 0.0;
    for (const MultRow& r : bound->mult_rows()) {
      const double resid = r.logit_P - logit(bound->p_at(state, r.i, r.j, r.t)) -
                           state.get(blocks.delta, r.i) - state.get(blocks.gamma, r.j);
      precision += r.G / s2eps;
      weighted += resid * r.G / s2eps;
    }
    Eigen::VectorXd out(1);
    out[0] = weighted / precision;
    return out;
  }
  if (target.name == "mu") {
    const std::unique_ptr<BoundModel> bound_base = bind(data);
    const auto* bound = static_cast<const BoundUkraine*>(bound_base.get());
    const double tau = state.get(blocks.tau, 0);
    double precision = 1.0;  // N(0, 1) prior
    double weighted = 0.0;
    for (const NsuRow& r : bound->nsu_rows()) {
      const double n = bound->n_at(state, r.i, r.t);
      const double w = n * n / (tau * r.S * r.S);
      precision += w;
      weighted += (r.log_N - std::log(n)) * w;
    }
    Eigen::VectorXd out(1);
    out[0] = weighted / precision;
    return out;
  }

  // l targets: E[l_t | pi, sigmas] = quadrature over (a0, b0) given the
  // initial prevalences plus exact Gaussian means for each drift term.
  Eigen::VectorXd pi0(config_.site_count());
  for (int i = 0; i < config_.site_count(); ++i) pi0[i] = state.get(blocks.pi, i * T + 0);
  const double l0 = expected_initial_logit_mean(pi0);

  const double s2pi = state.get(blocks.s2pi, 0);
  const double s2phi = state.get(blocks.s2phi, 0);
  Eigen::VectorXd phi_mean(T - 1);
  for (int t = 0; t + 1 < T; ++t) {
    double sum_step = 0.0;
    for (int i = 0; i < config_.site_count(); ++i) {
      sum_step += logit(state.get(blocks.pi, i * T + t + 1)) -
                  logit(state.get(blocks.pi, i * T + t));
    }
    const double precision = config_.site_count() / s2pi + 1.0 / s2phi;
    phi_mean[t] = (sum_step / s2pi) / precision;
  }

  auto l_mean = [&](int upto) {
    double l = l0;
    for (int t = 0; t < upto; ++t) l += phi_mean[t];
    return l;
  };
  if (target.name == "l_all") {
    Eigen::VectorXd out(T);
    for (int t = 0; t < T; ++t) out[t] = l_mean(t);
    return out;
  }
  const int year = std::stoi(target.name.substr(2));
  Eigen::VectorXd out(1);
  out[0] = l_mean(config_.year_index(year));
  return out;
}

void UkraineModel::design_columns(const DataRow& pattern_cell,
                                  std::vector<std::string>& names) const {
  const std::string tag =
      pattern_cell.source + "/" + std::to_string(pattern_cell.site) + "/" +
      std::to_string(pattern_cell.year);
  if (pattern_cell.source == kNetworkScaleUpSource) {
    names.push_back("N:" + tag);
  } else {
    names.push_back("P:" + tag);
    names.push_back("Y:" + tag);
  }
}

void UkraineModel::design_values(const DataRow& simulated_row,
                                 std::vector<double>& values) const {
  if (simulated_row.source == kNetworkScaleUpSource) {
    values.push_back(std::log(simulated_row.value));
  } else {
    values.push_back(logit(simulated_row.value));
    values.push_back(std::log1p(simulated_row.count));
  }
}

UkraineConfig default_config() {
  UkraineConfig config;
  for (int i = 1; i <= 27; ++i) config.site_ids.push_back(i);
  config.years = {2007, 2008, 2009, 2010, 2013, 2014, 2015};
  config.subgroups = {"DTF", "DTP", "Hospital", "NGO", "Prevention", "SMT", "Survey"};
  return config;
}

SyntheticSchedule default_schedule() {
  SyntheticSchedule schedule;
  schedule.cells = {
      {"Hospital", 2007, 14},
      {kNetworkScaleUpSource, 2008, 27},
      {"Survey", 2009, 14},
      {"Hospital", 2010, 12},
      {"NGO", 2010, 26},
      {"Prevention", 2010, 21},
      {"SMT", 2010, 23},
      {"Survey", 2013, 27},
      {"DTP", 2014, 27},
      {"Hospital", 2014, 27},
      {"SMT", 2014, 24},
      {"DTF", 2015, 27},
      {"DTP", 2015, 27},
      {"Hospital", 2015, 27},
      {"NGO", 2015, 27},
      {"SMT", 2015, 23},
  };
  return schedule;
}

void SyntheticSchedule::validate(const UkraineConfig& config) const {
  for (const Cell& cell : cells) {
    if (cell.source != kNetworkScaleUpSource && config.subgroup_index(cell.source) < 0) {
      throw_error(ErrorKind::Config,
                  "schedule references unknown subgroup '" + cell.source + "'");
    }
    config.year_index(cell.year);
    if (cell.site_count < 0 || cell.site_count > config.site_count()) {
      throw_error(ErrorKind::Config, "schedule site count out of range for " + cell.source);
    }
  }
  if (!(survey_size >= 1.0)) throw_error(ErrorKind::Config, "schedule survey size must be >= 1");
  if (!(nsu_rel_error > 0.0)) throw_error(ErrorKind::Config, "schedule NSU error must be > 0");
}

std::map<std::pair<int, int>, double> synthetic_populations(const UkraineConfig& config,
                                                            RngStream& rng) {
  std::map<std::pair<int, int>, double> table;
  for (int site_id : config.site_ids) {
    const double pop = std::exp(rng.uniform(std::log(1e4), std::log(1e6)));
    for (int year : config.years) table[{site_id, year}] = std::floor(pop);
  }
  return table;
}

Dataset population_dataset(const std::map<std::pair<int, int>, double>& table) {
  Dataset data;
  for (const auto& [key, total] : table) data.set_population(key.first, key.second, total);
  return data;
}

ParameterState synthetic_true_state(const UkraineModel& model, const Dataset& populations,
                                    RngStream& rng) {
  const UkraineConfig& config = model.config();
  const LayoutPtr layout = model.layout_for(populations);
  const Blocks blocks(*layout);
  ParameterState s = ParameterState::zeros(layout);
  const int S = config.site_count();
  const int T = config.year_count();
  const int J = config.subgroup_count();

  s.set(blocks.s2pi, 0, 0.01);
  s.set(blocks.s2phi, 0, 0.04);
  s.set(blocks.s2p, 0, 0.02);
  s.set(blocks.s2eta, 0, 0.04);
  s.set(blocks.s2delta, 0, 0.09);
  s.set(blocks.s2gamma, 0, 0.25);
  s.set(blocks.s2eps, 0, 4.0);
  s.set(blocks.tau, 0, 1.0);
  s.set(blocks.b0m, 0, 0.03);
  s.set(blocks.b0c, 0, 100.0);
  s.set(blocks.theta, 0, rng.normal(0.0, 1.0));
  s.set(blocks.mu, 0, rng.normal(0.0, 1.0));

  for (int j = 0; j < J; ++j) {
    s.set(blocks.bjm, j, rng.uniform(0.1, 0.5));
    s.set(blocks.bjc, j, 30.0);
    s.set(blocks.gamma, j, rng.normal(0.0, std::sqrt(s.get(blocks.s2gamma, 0))));
    for (int t = 0; t + 1 < T; ++t) {
      s.set(blocks.eta, j * (T - 1) + t, rng.normal(0.0, std::sqrt(s.get(blocks.s2eta, 0))));
    }
  }
  for (int t = 0; t + 1 < T; ++t) {
    s.set(blocks.phi, t, rng.normal(0.0, std::sqrt(s.get(blocks.s2phi, 0))));
  }
  for (int i = 0; i < S; ++i) {
    s.set(blocks.delta, i, rng.normal(0.0, std::sqrt(s.get(blocks.s2delta, 0))));
    double pi = clamp_unit(rng.beta(s.get(blocks.b0m, 0) * s.get(blocks.b0c, 0),
                                    (1.0 - s.get(blocks.b0m, 0)) * s.get(blocks.b0c, 0)));
    for (int t = 0; t < T; ++t) {
      if (t > 0) {
        pi = clamp_unit(sigmoid(rng.normal(logit(pi) + s.get(blocks.phi, t - 1),
                                           std::sqrt(s.get(blocks.s2pi, 0)))));
      }
      s.set(blocks.pi, i * T + t, pi);
      const double upper = layout->spec(blocks.n).upper[i * T + t];
      const double n = static_cast<double>(rng.binomial(static_cast<long long>(upper), pi));
      s.set(blocks.n, i * T + t, std::max(1.0, n));
    }
    for (int j = 0; j < J; ++j) {
      double p = clamp_unit(rng.beta(s.get(blocks.bjm, j) * s.get(blocks.bjc, j),
                                     (1.0 - s.get(blocks.bjm, j)) * s.get(blocks.bjc, j)));
      for (int t = 0; t < T; ++t) {
        if (t > 0) {
          const double drift = s.get(blocks.eta, j * (T - 1) + t - 1);
          p = clamp_unit(sigmoid(rng.normal(logit(p) + drift,
                                            std::sqrt(s.get(blocks.s2p, 0)))));
        }
        s.set(blocks.p, (i * J + j) * T + t, p);
      }
    }
  }
  return s;
}

Dataset generate_synthetic(const UkraineModel& model, const SyntheticSchedule& schedule,
                           const ParameterState& true_state, const Dataset& populations,
                           std::uint64_t seed) {
  const UkraineConfig& config = model.config();
  schedule.validate(config);
  const Blocks blocks(true_state.layout());
  const int T = config.year_count();

  std::vector<DataRow> pattern;
  for (const SyntheticSchedule::Cell& cell : schedule.cells) {
    const int t = config.year_index(cell.year);
    for (int i = 0; i < cell.site_count; ++i) {
      DataRow row;
      row.source = cell.source;
      row.site = config.site_ids[static_cast<std::size_t>(i)];
      row.year = cell.year;
      row.population = populations.population(row.site, row.year);
      if (cell.source == kNetworkScaleUpSource) {
        row.std_error =
            std::max(1.0, schedule.nsu_rel_error * true_state.get(blocks.n, i * T + t));
      } else {
        row.trials = schedule.survey_size;
      }
      pattern.push_back(std::move(row));
    }
  }

  RngStream rng(seed);
  std::vector<DataRow> rows = model.simulate_predictive(true_state, pattern, rng);
  Dataset out;
  for (DataRow& row : rows) out.add_row(std::move(row));
  for (const auto& [key, total] : populations.population_table()) {
    out.set_population(key.first, key.second, total);
  }
  out.validate_unique_keys();
  return out;
}

}  // namespace voi

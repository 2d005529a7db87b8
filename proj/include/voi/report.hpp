#pragma once

#include <optional>
#include <set>

#include "voi/config_file.hpp"
#include "voi/ingest.hpp"
#include "voi/models/ukraine.hpp"
#include "voi/svg.hpp"
#include "voi/voi.hpp"

namespace voi {

// Fully resolved run configuration: file paths, model structure, partition
// scheme, targets, sampler and regression settings, output and seeds. Every
// run requires an explicit seed.
struct RunConfig {
  IngestPaths paths;
  bool split_ngo_by_year = false;
  std::vector<int> model_years;               // empty: derive from population table
  std::vector<std::string> model_subgroups;   // empty: derive from data sources
  std::optional<double> sigma2_N;             // accepted, unused by the model

  PartitionScheme scheme = PartitionScheme::BySource;
  std::vector<std::string> target_names = {"theta", "mu", "l_all"};

  SamplerConfig sampler;
  RegressionConfig regression;
  TaxonomyThresholds thresholds;
  double evoir_floor_factor = 1e-8;
  bool use_rao_blackwell = false;

  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  bool resume = false;
  PlotOptions plots;

  // prospective designs
  std::vector<std::string> designs;
  int design_year = 0;  // 0: one year past the last modeled year
  double design_survey_size = 300.0;
  double design_nsu_rel_error = 0.2;
  std::string new_subgroup_name = "new-subgroup";

  KeyValueConfig raw;  // echoed into the manifest
};

// Registered configuration keys; unknown keys are config errors (and the
// registry doubles as the documented configuration surface).
const std::set<std::string>& run_config_known_keys();

RunConfig load_run_config(const std::string& path);

struct ReportBundle {
  std::vector<VoiTableRow> voi_rows;
  struct ScoreRow {
    std::string partition, target, component, candidate;
    double heldout_loss = 0.0;
    bool selected = false;
  };
  std::vector<ScoreRow> scores;
  std::vector<PrevalencePoint> prevalence;
  std::vector<std::string> notices;
};

struct DesignRow {
  int rank = 0;
  std::string design;
  double pvsi = 0.0;
  double mc_error = 0.0;
};

// Builds the model implied by config and data (sites from the population
// table, subgroups from the data unless pinned).
UkraineModel build_model(const RunConfig& config, const Dataset& data);

// Full fit: samples (or resumes) the all-data chain and persists it.
PosteriorChain fit_full_chain(const RunConfig& config, const UkraineModel& model,
                              const Dataset& data);

// Leave-one-out influence analysis: fits the full and per-partition reduced
// chains (cached on disk), computes RVSI / PVSI / EVOIR / surprise per
// target, classifies the four-case taxonomy, and writes tables, plots, and
// the run manifest under config.out_dir.
ReportBundle run_influence(const RunConfig& config);

// Prospective design ranking across the configured candidate designs.
std::vector<DesignRow> run_prospective(const RunConfig& config);

// Regenerates plots from persisted table files (byte-identical for the same
// table bytes).
void emit_plots(const std::string& out_dir, const PlotOptions& options);

std::vector<VoiTableRow> read_voi_table(const std::string& path);

}  // namespace voi

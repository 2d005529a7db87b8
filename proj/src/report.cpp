#include "voi/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>

#include "voi/chain_io.hpp"
#include "voi/csv.hpp"
#include "voi/errors.hpp"
#include "voi/parallel.hpp"

namespace voi {

namespace {

namespace fs = std::filesystem;

std::string sanitize(const std::string& label) {
  std::string out;
  for (char c : label) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out;
}

std::string hex64_str(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

const std::set<std::string>& run_config_known_keys() {
  static const std::set<std::string> keys = {
      "data.multiplier", "data.nsu", "data.population",
      "model.years", "model.subgroups", "model.split_ngo_by_year", "model.sigma2_N",
      "partition.scheme",
      "targets.list",
      "sampler.iterations", "sampler.burn_in_fraction", "sampler.thinning",
      "sampler.default_scale", "sampler.adaptation_window", "sampler.warmup_sweeps",
      "regression.layers", "regression.nodes", "regression.dropout",
      "regression.include_linear", "regression.output_activation",
      "regression.adadelta_rho", "regression.adadelta_epsilon",
      "regression.epochs", "regression.batch_size", "regression.patience",
      "regression.train_fraction", "regression.max_draws",
      "voi.rvsi_quantile", "voi.evoir_high", "voi.evoir_floor_factor",
      "voi.use_rao_blackwell",
      "plots.log_x", "plots.log_y",
      "run.out", "run.seed", "run.workers",
      "prospective.designs", "prospective.year", "prospective.survey_size",
      "prospective.nsu_rel_error", "prospective.new_subgroup_name",
  };
  return keys;
}

RunConfig load_run_config(const std::string& path) {
  KeyValueConfig kv = KeyValueConfig::parse_file(path);
  const auto unknown = kv.unknown_keys(run_config_known_keys());
  if (!unknown.empty()) {
    std::string msg = path + ": unknown configuration key(s):";
    for (const std::string& key : unknown) msg += " " + key;
    throw_error(ErrorKind::Config, msg);
  }

  RunConfig config;
  config.raw = kv;
  config.paths.multiplier = kv.require_string("data.multiplier");
  config.paths.nsu = kv.require_string("data.nsu");
  config.paths.population = kv.require_string("data.population");
  config.split_ngo_by_year = kv.get_bool("model.split_ngo_by_year", false);
  config.model_years = kv.get_int_list("model.years", {});
  config.model_subgroups = kv.get_string_list("model.subgroups", {});
  if (kv.has("model.sigma2_N")) config.sigma2_N = kv.get_double("model.sigma2_N", 0.0);

  config.scheme = parse_partition_scheme(kv.get_string("partition.scheme", "by-source"));
  config.target_names = kv.get_string_list("targets.list", {"theta", "mu", "l_all"});

  config.sampler.iterations = kv.get_long("sampler.iterations", 60000);
  config.sampler.burn_in_fraction = kv.get_double("sampler.burn_in_fraction", 0.5);
  config.sampler.thinning = kv.get_int("sampler.thinning", 2);
  config.sampler.default_scale = kv.get_double("sampler.default_scale", 0.5);
  config.sampler.adaptation_window = kv.get_int("sampler.adaptation_window", 50);
  config.sampler.warmup_sweeps = kv.get_int("sampler.warmup_sweeps", 100);
  config.sampler.validate();

  config.regression.layer_options = kv.get_int_list("regression.layers", {1, 2, 3});
  config.regression.node_options = kv.get_int_list("regression.nodes", {50, 100});
  config.regression.dropout_options = kv.get_double_list("regression.dropout", {0.3, 0.5, 0.7});
  config.regression.include_linear = kv.get_bool("regression.include_linear", true);
  const std::string activation = kv.get_string("regression.output_activation", "identity");
  if (activation == "identity") {
    config.regression.output_activation = OutputActivation::Identity;
  } else if (activation == "logit-inverse") {
    config.regression.output_activation = OutputActivation::LogitInverse;
  } else {
    throw_error(ErrorKind::Config, "regression.output_activation must be identity or "
                                   "logit-inverse");
  }
  config.regression.adadelta.rho = kv.get_double("regression.adadelta_rho", 0.95);
  config.regression.adadelta.epsilon = kv.get_double("regression.adadelta_epsilon", 1e-6);
  config.regression.epochs = kv.get_int("regression.epochs", 200);
  config.regression.batch_size = kv.get_int("regression.batch_size", 128);
  config.regression.patience = kv.get_int("regression.patience", 20);
  config.regression.train_fraction = kv.get_double("regression.train_fraction", 0.8);
  config.regression.max_draws = kv.get_int("regression.max_draws", 4000);

  config.thresholds.rvsi_quantile = kv.get_double("voi.rvsi_quantile", 0.75);
  config.thresholds.evoir_high = kv.get_double("voi.evoir_high", 1.5);
  config.evoir_floor_factor = kv.get_double("voi.evoir_floor_factor", 1e-8);
  config.use_rao_blackwell = kv.get_bool("voi.use_rao_blackwell", false);

  config.plots.log_x = kv.get_bool("plots.log_x", false);
  config.plots.log_y = kv.get_bool("plots.log_y", false);

  config.out_dir = kv.get_string("run.out", "out");
  if (!kv.has("run.seed")) {
    throw_error(ErrorKind::Config, path + ": run.seed is mandatory (no nondeterministic runs)");
  }
  config.seed = kv.get_u64("run.seed", 0);
  config.workers = kv.get_int("run.workers", 1);

  config.designs = kv.get_string_list("prospective.designs", {});
  config.design_year = kv.get_int("prospective.year", 0);
  config.design_survey_size = kv.get_double("prospective.survey_size", 300.0);
  config.design_nsu_rel_error = kv.get_double("prospective.nsu_rel_error", 0.2);
  config.new_subgroup_name = kv.get_string("prospective.new_subgroup_name", "new-subgroup");
  return config;
}

UkraineModel build_model(const RunConfig& config, const Dataset& data) {
  UkraineConfig model_config;
  std::set<int> sites;
  std::set<int> years;
  for (const auto& [key, total] : data.population_table()) {
    sites.insert(key.first);
    years.insert(key.second);
  }
  model_config.site_ids.assign(sites.begin(), sites.end());
  if (!config.model_years.empty()) {
    model_config.years = config.model_years;
    std::sort(model_config.years.begin(), model_config.years.end());
  } else {
    model_config.years.assign(years.begin(), years.end());
  }
  if (!config.model_subgroups.empty()) {
    model_config.subgroups = config.model_subgroups;
  } else {
    std::set<std::string> subgroups;
    for (const DataRow& row : data.rows()) {
      if (row.source != kNetworkScaleUpSource) subgroups.insert(row.source);
    }
    model_config.subgroups.assign(subgroups.begin(), subgroups.end());
  }
  model_config.sigma2_N = config.sigma2_N;
  return UkraineModel(std::move(model_config));
}

namespace {

PosteriorChain fit_or_load_chain(const RunConfig& config, const UkraineModel& model,
                                 const Dataset& subset, const std::string& label,
                                 std::uint64_t universe_hash) {
  SamplerConfig sampler = config.sampler;
  sampler.seed = splitmix64(config.seed ^ fnv1a64("chain:" + label));
  const std::string base = config.out_dir + "/chains/" + sanitize(label);
  if (config.resume && fs::exists(base + ".csv") && fs::exists(base + ".json")) {
    try {
      PosteriorChain chain = load_chain(base);
      const ChainProvenance& prov = chain.provenance();
      if (prov.model_name == model.name() && prov.dataset_hash == universe_hash &&
          prov.config_hash == sampler.hash() && prov.seed == sampler.seed &&
          prov.partition_label == label) {
        return chain;
      }
    } catch (const Error&) {
      // unreadable cache entries are refit below
    }
  }
  PosteriorChain chain = sample_posterior(model, subset, sampler, label, universe_hash);
  save_chain(chain, base);
  return chain;
}

void append_prevalence(const PosteriorChain& chain, const UkraineModel& model,
                       const std::string& label, std::vector<PrevalencePoint>& out) {
  const UkraineConfig& config = model.config();
  const int T = config.year_count();
  const int block = chain.layout()->index_of("pi");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(config.site_count() * T);
  chain.for_each_state([&](const ParameterState& s) { mean += s.block(block); });
  mean /= std::max(1, chain.size());
  for (int i = 0; i < config.site_count(); ++i) {
    for (int t = 0; t < T; ++t) {
      out.push_back({label, config.site_ids[static_cast<std::size_t>(i)],
                     config.years[static_cast<std::size_t>(t)], mean[i * T + t]});
    }
  }
}

void write_voi_table(const std::string& path, const std::vector<VoiTableRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const VoiTableRow& row : rows) {
    out.push_back({row.partition, row.target, format_number(row.rvsi),
                   format_number(row.rvsi_se), format_number(row.pvsi),
                   format_number(row.pvsi_se), row.evoir_defined ? "1" : "0",
                   row.evoir_defined ? format_number(row.evoir) : "",
                   format_number(row.surprise), std::to_string(row.taxonomy_case), row.taxonomy,
                   row.selected_regressor, format_number(row.heldout_loss)});
  }
  write_csv(path,
            {"partition", "target", "rvsi", "rvsi_se", "pvsi", "pvsi_se", "evoir_defined",
             "evoir", "surprise", "taxonomy_case", "taxonomy", "selected_regressor",
             "heldout_loss"},
            out);
}

void write_manifest(const RunConfig& config, std::uint64_t dataset_hash,
                    const std::vector<std::pair<std::string, ChainProvenance>>& chains,
                    const std::vector<std::string>& files,
                    const std::vector<std::string>& notices, bool partial) {
  nlohmann::ordered_json manifest;
  manifest["format_version"] = "voikit-report-1";
  manifest["generated_at"] = utc_timestamp();  // sole timestamp field
  manifest["partial"] = partial;
  manifest["seed"] = config.seed;
  manifest["workers"] = config.workers;
  manifest["dataset_hash"] = hex64_str(dataset_hash);
  nlohmann::ordered_json echo;
  for (const auto& [key, value] : config.raw.entries()) echo[key] = value;
  manifest["config"] = std::move(echo);
  nlohmann::ordered_json chain_info;
  for (const auto& [label, prov] : chains) {
    nlohmann::ordered_json entry;
    entry["model"] = prov.model_name;
    entry["dataset_hash"] = hex64_str(prov.dataset_hash);
    entry["conditioned_rows_hash"] = hex64_str(prov.conditioned_rows_hash);
    entry["conditioned_row_count"] = prov.conditioned_row_count;
    entry["config_hash"] = hex64_str(prov.config_hash);
    entry["seed"] = prov.seed;
    chain_info[label] = std::move(entry);
  }
  manifest["chains"] = std::move(chain_info);
  manifest["files"] = files;
  manifest["notices"] = notices;
  std::ofstream out(config.out_dir + "/manifest.json");
  if (!out) throw_error(ErrorKind::Io, "cannot write manifest under " + config.out_dir);
  out << manifest.dump(2) << "\n";
}

}  // namespace

PosteriorChain fit_full_chain(const RunConfig& config, const UkraineModel& model,
                              const Dataset& data) {
  fs::create_directories(config.out_dir + "/chains");
  return fit_or_load_chain(config, model, data, "full", data.content_hash());
}

ReportBundle run_influence(const RunConfig& config) {
  fs::create_directories(config.out_dir + "/chains");
  IngestReport ingest_report;
  const Dataset data = ingest(config.paths, &ingest_report, config.split_ngo_by_year);
  const UkraineModel model = build_model(config, data);
  const std::uint64_t universe = data.content_hash();

  std::vector<DataPartition> partitions = make_partitions(data, config.scheme);
  validate_partitions(data, partitions);

  std::vector<TargetSpec> targets;
  for (const std::string& name : config.target_names) {
    targets.push_back(model.target_by_name(name));
  }

  ReportBundle bundle;
  bundle.notices.push_back("partitions: " + std::to_string(partitions.size()) + " under scheme " +
                           to_string(config.scheme));

  const PosteriorChain full = fit_full_chain(config, model, data);
  append_prevalence(full, model, "full", bundle.prevalence);

  struct JobResult {
    std::vector<VoiTableRow> rows;
    std::vector<ReportBundle::ScoreRow> scores;
    std::vector<PrevalencePoint> prevalence;
    ChainProvenance provenance;
    std::string error;
    ErrorKind error_kind = ErrorKind::Usage;
  };
  std::vector<JobResult> results(partitions.size());

  RegressionConfig base_regression = config.regression;
  base_regression.workers = 1;  // jobs already run in parallel

  parallel_for(static_cast<int>(partitions.size()), std::max(1, config.workers), [&](int pi) {
    JobResult& result = results[static_cast<std::size_t>(pi)];
    const DataPartition& part = partitions[static_cast<std::size_t>(pi)];
    try {
      const PosteriorChain reduced = fit_or_load_chain(
          config, model, data.subset(part.complement), "loo:" + part.label, universe);
      result.provenance = reduced.provenance();
      append_prevalence(reduced, model, "loo:" + part.label, result.prevalence);
      for (const TargetSpec& target : targets) {
        const VoiValue rvsi = rvsi_quadratic(full, reduced, target);
        RegressionConfig regression = base_regression;
        regression.seed = splitmix64(config.seed ^ fnv1a64("pvsi:" + part.label + ":" +
                                                           target.name));
        const bool rao_blackwell =
            config.use_rao_blackwell && model.supports_conditional_mean(target);
        const PvsiEstimate estimate =
            rao_blackwell
                ? pvsi_rao_blackwell_partition(reduced, model, data, part, target, regression)
                : pvsi_regression_partition(reduced, model, data, part, target, regression);
        const double posterior_var = chain_variance(reduced, target).sum();
        const Evoir ratio =
            evoir(rvsi.value, estimate.value, posterior_var, config.evoir_floor_factor);
        VoiTableRow row;
        row.partition = part.label;
        row.target = target.name;
        row.rvsi = rvsi.value;
        row.rvsi_se = rvsi.mc_error;
        row.pvsi = estimate.value;
        row.pvsi_se = estimate.mc_error;
        row.evoir_defined = ratio.defined;
        row.evoir = ratio.value;
        row.surprise = surprise_probability(estimate, rvsi.value);
        double heldout = 0.0;
        for (const PvsiComponentDiagnostics& diag : estimate.components) {
          heldout += diag.heldout_loss_selected;
          for (const RegressorScore& score : diag.scores) {
            result.scores.push_back({part.label, target.name, diag.component, score.description,
                                     score.held_out_loss, score.selected});
          }
        }
        row.heldout_loss =
            estimate.components.empty()
                ? 0.0
                : heldout / static_cast<double>(estimate.components.size());
        row.selected_regressor =
            estimate.components.empty() ? "" : estimate.components.front().selected;
        result.rows.push_back(std::move(row));
      }
    } catch (const Error& e) {
      result.error = "partition '" + part.label + "': " + e.what();
      result.error_kind = e.kind();
    } catch (const std::exception& e) {
      result.error = "partition '" + part.label + "': " + e.what();
      result.error_kind = ErrorKind::Usage;
    }
  });

  std::vector<std::pair<std::string, ChainProvenance>> chain_infos;
  chain_infos.push_back({"full", full.provenance()});
  std::string first_error;
  ErrorKind first_kind = ErrorKind::Usage;
  for (std::size_t pi = 0; pi < results.size(); ++pi) {
    JobResult& result = results[pi];
    if (!result.error.empty()) {
      if (first_error.empty()) {
        first_error = result.error;
        first_kind = result.error_kind;
      }
      bundle.notices.push_back("FAILED " + result.error);
      continue;
    }
    chain_infos.push_back({"loo:" + partitions[pi].label, result.provenance});
    for (VoiTableRow& row : result.rows) bundle.voi_rows.push_back(std::move(row));
    for (auto& score : result.scores) bundle.scores.push_back(std::move(score));
    for (auto& point : result.prevalence) bundle.prevalence.push_back(std::move(point));
  }

  // four-case classification per target over the partition batch
  for (const TargetSpec& target : targets) {
    std::vector<double> batch;
    for (const VoiTableRow& row : bundle.voi_rows) {
      if (row.target == target.name) batch.push_back(row.rvsi);
    }
    if (batch.empty()) continue;
    const double cutoff = rvsi_batch_cutoff(batch, config.thresholds);
    for (VoiTableRow& row : bundle.voi_rows) {
      if (row.target != target.name) continue;
      const TaxonomyCase taxonomy = classify_taxonomy(
          row.rvsi, Evoir{row.evoir, row.evoir_defined}, cutoff, config.thresholds);
      row.taxonomy_case = taxonomy.case_number;
      row.taxonomy = taxonomy.label;
    }
  }

  // persist tables
  write_voi_table(config.out_dir + "/voi_table.csv", bundle.voi_rows);
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& score : bundle.scores) {
      rows.push_back({score.partition, score.target, score.component, score.candidate,
                      format_number(score.heldout_loss), score.selected ? "1" : "0"});
    }
    write_csv(config.out_dir + "/regression_scores.csv",
              {"partition", "target", "component", "candidate", "heldout_loss", "selected"},
              rows);
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const PrevalencePoint& pt : bundle.prevalence) {
      rows.push_back({pt.partition, std::to_string(pt.site), std::to_string(pt.year),
                      format_number(pt.prevalence)});
    }
    write_csv(config.out_dir + "/prevalence_curves.csv",
              {"partition", "site", "year", "prevalence"}, rows);
  }

  std::vector<std::string> files = {"voi_table.csv", "regression_scores.csv",
                                    "prevalence_curves.csv"};
  if (first_error.empty()) {
    emit_plots(config.out_dir, config.plots);
    for (const std::string& target : config.target_names) {
      files.push_back("scatter_" + sanitize(target) + ".svg");
    }
    files.push_back("prevalence_curves.svg");
  }
  bundle.notices.push_back(ingest_report.render());
  write_manifest(config, universe, chain_infos, files, bundle.notices, !first_error.empty());

  if (!first_error.empty()) {
    throw_error(first_kind, "influence run aborted (partial results in " + config.out_dir +
                                "): " + first_error);
  }
  return bundle;
}

std::vector<DesignRow> run_prospective(const RunConfig& config) {
  fs::create_directories(config.out_dir + "/chains");
  const Dataset data = ingest(config.paths, nullptr, config.split_ngo_by_year);
  const UkraineModel model = build_model(config, data);
  const UkraineConfig& mc = model.config();
  const PosteriorChain full = fit_full_chain(config, model, data);
  const TargetSpec target = model.target_by_name(
      config.target_names.empty() ? "l_all" : config.target_names.front());

  const int design_year = config.design_year > 0 ? config.design_year : mc.years.back() + 1;
  const int last_year = mc.years.back();

  // latest observed scale-up estimate per site, for design std errors
  std::map<int, std::pair<int, double>> latest_nsu;  // site -> (year, estimate)
  for (const DataRow& row : data.rows()) {
    if (row.source != kNetworkScaleUpSource) continue;
    auto it = latest_nsu.find(row.site);
    if (it == latest_nsu.end() || row.year > it->second.first) {
      latest_nsu[row.site] = {row.year, row.value};
    }
  }

  auto make_design = [&](const std::string& name) {
    std::vector<DataRow> pattern;
    for (int site : mc.site_ids) {
      DataRow cell;
      cell.site = site;
      cell.year = design_year;
      cell.population = data.population(site, last_year);
      if (name == kNetworkScaleUpSource) {
        cell.source = name;
        const auto it = latest_nsu.find(site);
        cell.std_error = config.design_nsu_rel_error *
                         (it != latest_nsu.end() ? it->second.second : 0.01 * cell.population);
      } else {
        cell.source = name;
        cell.trials = config.design_survey_size;
      }
      pattern.push_back(std::move(cell));
    }
    return pattern;
  };

  std::vector<std::string> designs = config.designs;
  if (designs.empty()) {
    designs = mc.subgroups;
    designs.push_back(config.new_subgroup_name);
    designs.push_back(kNetworkScaleUpSource);
  }

  std::vector<DesignRow> rows(designs.size());
  RegressionConfig base_regression = config.regression;
  base_regression.workers = 1;
  parallel_for(static_cast<int>(designs.size()), std::max(1, config.workers), [&](int d) {
    const std::string& name = designs[static_cast<std::size_t>(d)];
    RegressionConfig regression = base_regression;
    regression.seed = splitmix64(config.seed ^ fnv1a64("design:" + name));
    const auto pattern = make_design(name);
    const PvsiEstimate estimate =
        prospective_design_value(full, model, data, pattern, target, regression);
    rows[static_cast<std::size_t>(d)] = {0, name, estimate.value, estimate.mc_error};
  });

  std::stable_sort(rows.begin(), rows.end(), [](const DesignRow& a, const DesignRow& b) {
    if (a.pvsi != b.pvsi) return a.pvsi > b.pvsi;
    return a.design < b.design;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i + 1);

  std::vector<std::vector<std::string>> table;
  for (const DesignRow& row : rows) {
    table.push_back({std::to_string(row.rank), row.design, format_number(row.pvsi),
                     format_number(row.mc_error)});
  }
  write_csv(config.out_dir + "/designs.csv", {"rank", "design", "pvsi", "mc_error"}, table);
  write_manifest(config, data.content_hash(), {{"full", full.provenance()}},
                 {"designs.csv"}, {"prospective target: " + target.name}, false);
  return rows;
}

std::vector<VoiTableRow> read_voi_table(const std::string& path) {
  const CsvTable csv = read_csv(path);
  std::vector<VoiTableRow> rows;
  const int c_partition = csv.required_column("partition");
  const int c_target = csv.required_column("target");
  const int c_rvsi = csv.required_column("rvsi");
  const int c_rvsi_se = csv.required_column("rvsi_se");
  const int c_pvsi = csv.required_column("pvsi");
  const int c_pvsi_se = csv.required_column("pvsi_se");
  const int c_defined = csv.required_column("evoir_defined");
  const int c_evoir = csv.required_column("evoir");
  const int c_surprise = csv.required_column("surprise");
  const int c_case = csv.required_column("taxonomy_case");
  const int c_taxonomy = csv.required_column("taxonomy");
  const int c_selected = csv.required_column("selected_regressor");
  const int c_heldout = csv.required_column("heldout_loss");
  for (const auto& cells : csv.rows) {
    VoiTableRow row;
    row.partition = cells[c_partition];
    row.target = cells[c_target];
    row.rvsi = std::strtod(cells[c_rvsi].c_str(), nullptr);
    row.rvsi_se = std::strtod(cells[c_rvsi_se].c_str(), nullptr);
    row.pvsi = std::strtod(cells[c_pvsi].c_str(), nullptr);
    row.pvsi_se = std::strtod(cells[c_pvsi_se].c_str(), nullptr);
    row.evoir_defined = cells[c_defined] == "1";
    row.evoir = cells[c_evoir].empty() ? 0.0 : std::strtod(cells[c_evoir].c_str(), nullptr);
    row.surprise = std::strtod(cells[c_surprise].c_str(), nullptr);
    row.taxonomy_case = std::atoi(cells[c_case].c_str());
    row.taxonomy = cells[c_taxonomy];
    row.selected_regressor = cells[c_selected];
    row.heldout_loss = std::strtod(cells[c_heldout].c_str(), nullptr);
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit_plots(const std::string& out_dir, const PlotOptions& options) {
  const std::vector<VoiTableRow> rows = read_voi_table(out_dir + "/voi_table.csv");
  std::vector<std::string> targets;
  for (const VoiTableRow& row : rows) {
    if (std::find(targets.begin(), targets.end(), row.target) == targets.end()) {
      targets.push_back(row.target);
    }
  }
  for (const std::string& target : targets) {
    std::ofstream out(out_dir + "/scatter_" + sanitize(target) + ".svg");
    if (!out) throw_error(ErrorKind::Io, "cannot write plot under " + out_dir);
    out << render_evoir_scatter(rows, target, options);
  }

  const CsvTable prev_csv = read_csv(out_dir + "/prevalence_curves.csv");
  std::vector<PrevalencePoint> points;
  const int c_partition = prev_csv.required_column("partition");
  const int c_site = prev_csv.required_column("site");
  const int c_year = prev_csv.required_column("year");
  const int c_prev = prev_csv.required_column("prevalence");
  for (const auto& cells : prev_csv.rows) {
    points.push_back({cells[c_partition], std::atoi(cells[c_site].c_str()),
                      std::atoi(cells[c_year].c_str()),
                      std::strtod(cells[c_prev].c_str(), nullptr)});
  }
  std::ofstream out(out_dir + "/prevalence_curves.svg");
  if (!out) throw_error(ErrorKind::Io, "cannot write plot under " + out_dir);
  out << render_prevalence_curves(points);
}

}  // namespace voi

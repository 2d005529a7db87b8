// Batch front end: synthetic-data generation, posterior fitting, influence
// analysis, prospective design ranking, and plot regeneration.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>

#include "voi/chain_io.hpp"
#include "voi/csv.hpp"
#include "voi/errors.hpp"
#include "voi/ingest.hpp"
#include "voi/report.hpp"

namespace {

using namespace voi;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Budget:
      return 4;
    case ErrorKind::Init:
    case ErrorKind::Divergence:
      return 3;
    default:
      return 2;  // validation and usage problems
  }
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool resume = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* config = cmd->add_option("--config", flags.config_path, "run configuration file");
  if (config_required) config->required();
  cmd->add_option("--out", flags.out_dir, "output directory (overrides run.out)");
  cmd->add_option("--seed", flags.seed, "root seed (overrides run.seed)")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--workers", flags.workers, "worker count (overrides run.workers)");
  cmd->add_flag("--resume", flags.resume, "reuse cached chains when provenance matches");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig config = load_run_config(flags.config_path);
  if (flags.seed_set) {
    config.seed = flags.seed;
    config.raw.set("run.seed", std::to_string(flags.seed));
  }
  if (!flags.out_dir.empty()) {
    config.out_dir = flags.out_dir;
    config.raw.set("run.out", flags.out_dir);
  }
  if (flags.workers > 0) {
    config.workers = flags.workers;
    config.raw.set("run.workers", std::to_string(flags.workers));
  }
  config.resume = flags.resume;
  return config;
}

int cmd_simulate(const std::string& out_dir, std::uint64_t seed, int sites, double survey_size) {
  UkraineConfig config = default_config();
  if (sites < 2 || sites > config.site_count()) {
    throw_error(ErrorKind::Config, "--sites must lie in [2, 27]");
  }
  config.site_ids.resize(static_cast<std::size_t>(sites));
  UkraineModel model(config);

  SyntheticSchedule schedule = default_schedule();
  for (auto& cell : schedule.cells) cell.site_count = std::min(cell.site_count, sites);
  schedule.survey_size = survey_size;

  RngStream rng(seed);
  Dataset populations = population_dataset(synthetic_populations(model.config(), rng));
  ParameterState truth = synthetic_true_state(model, populations, rng);
  Dataset data = generate_synthetic(model, schedule, truth, populations, seed);
  write_dataset(data, out_dir);

  // generating values for recovery checks
  nlohmann::ordered_json truth_json;
  truth_json["seed"] = seed;
  truth_json["theta"] = truth.scalar("theta");
  truth_json["mu"] = truth.scalar("mu");
  for (const TargetSpec& target : model.targets()) {
    if (target.name.rfind("l_", 0) == 0 && target.arity() == 1) {
      truth_json[target.name] = eval_target(truth, target)[0];
    }
  }
  std::ofstream truth_out(out_dir + "/truth.json");
  truth_out << truth_json.dump(2) << "\n";

  IngestReport report;
  IngestPaths paths{out_dir + "/multiplier.csv", out_dir + "/nsu.csv",
                    out_dir + "/population.csv"};
  ingest(paths, &report);
  std::cout << "wrote synthetic bundle to " << out_dir << "\n" << report.render();
  return 0;
}

int cmd_fit(const CommonFlags& flags) {
  RunConfig config = resolve_config(flags);
  IngestReport report;
  const Dataset data = ingest(config.paths, &report, config.split_ngo_by_year);
  std::cout << report.render();
  const UkraineModel model = build_model(config, data);
  const PosteriorChain chain = fit_full_chain(config, model, data);
  std::cout << "chain: " << chain.size() << " draws, seed " << chain.provenance().seed << "\n";
  for (const auto& [block, rate] : chain.acceptance_rates()) {
    std::cout << "  acceptance " << block << ": " << rate << "\n";
  }
  return 0;
}

int cmd_influence(const CommonFlags& flags) {
  RunConfig config = resolve_config(flags);
  const ReportBundle bundle = run_influence(config);
  std::printf("%-24s %-10s %12s %12s %9s %9s  %s\n", "partition", "target", "rvsi", "pvsi",
              "evoir", "surprise", "class");
  for (const VoiTableRow& row : bundle.voi_rows) {
    std::printf("%-24s %-10s %12.5g %12.5g %9s %9.3f  %s\n", row.partition.c_str(),
                row.target.c_str(), row.rvsi, row.pvsi,
                row.evoir_defined ? format_number(row.evoir).c_str() : "undef", row.surprise,
                row.taxonomy.c_str());
  }
  std::cout << "report written to " << config.out_dir << "\n";
  return 0;
}

int cmd_prospective(const CommonFlags& flags) {
  RunConfig config = resolve_config(flags);
  const std::vector<DesignRow> rows = run_prospective(config);
  std::printf("%4s %-24s %12s %12s\n", "rank", "design", "pvsi", "mc_error");
  for (const DesignRow& row : rows) {
    std::printf("%4d %-24s %12.5g %12.5g\n", row.rank, row.design.c_str(), row.pvsi,
                row.mc_error);
  }
  std::cout << "table written to " << config.out_dir << "/designs.csv\n";
  return 0;
}

int cmd_report(const CommonFlags& flags) {
  PlotOptions options;
  std::string out_dir = flags.out_dir;
  if (!flags.config_path.empty()) {
    RunConfig config = load_run_config(flags.config_path);
    options = config.plots;
    if (out_dir.empty()) out_dir = config.out_dir;
  }
  if (out_dir.empty()) throw_error(ErrorKind::Config, "report needs --out or --config");
  emit_plots(out_dir, options);
  std::cout << "plots regenerated under " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"value-of-information analysis for multi-source population-size models"};
  app.require_subcommand(1);

  std::string sim_out = "synthetic";
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  int sim_sites = 27;
  double sim_survey = 300.0;
  auto* simulate = app.add_subcommand("simulate", "write a synthetic data bundle");
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--seed", sim_seed, "generator seed (required)")
      ->each([&sim_seed_set](const std::string&) { sim_seed_set = true; });
  simulate->add_option("--sites", sim_sites, "number of sites (2..27)");
  simulate->add_option("--survey-size", sim_survey, "survey size metadata for multiplier cells");

  CommonFlags fit_flags, influence_flags, prospective_flags, report_flags;
  add_common_flags(app.add_subcommand("fit", "fit the all-data posterior chain"), fit_flags,
                   true);
  add_common_flags(app.add_subcommand("influence", "leave-one-out influence analysis"),
                   influence_flags, true);
  add_common_flags(app.add_subcommand("prospective", "rank future data-collection designs"),
                   prospective_flags, true);
  add_common_flags(app.add_subcommand("report", "regenerate plots from persisted tables"),
                   report_flags, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate")) {
      if (!sim_seed_set) throw_error(ErrorKind::Config, "simulate requires --seed");
      return cmd_simulate(sim_out, sim_seed, sim_sites, sim_survey);
    }
    if (app.got_subcommand("fit")) return cmd_fit(fit_flags);
    if (app.got_subcommand("influence")) return cmd_influence(influence_flags);
    if (app.got_subcommand("prospective")) return cmd_prospective(prospective_flags);
    if (app.got_subcommand("report")) return cmd_report(report_flags);
  } catch (const voi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

#include "voi/chain_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "voi/errors.hpp"

namespace voi {

namespace {

std::string support_name(Support s) {
  switch (s) {
    case Support::Real:
      return "real";
    case Support::Positive:
      return "positive";
    case Support::UnitInterval:
      return "unit-interval";
    case Support::Count:
      return "count";
  }
  return "?";
}

Support support_from(const std::string& s) {
  if (s == "real") return Support::Real;
  if (s == "positive") return Support::Positive;
  if (s == "unit-interval") return Support::UnitInterval;
  if (s == "count") return Support::Count;
  throw_error(ErrorKind::Io, "unknown support kind '" + s + "' in chain sidecar");
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::uint64_t from_hex64(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

}  // namespace

void save_chain(const PosteriorChain& chain, const std::string& base_path) {
  if (!chain.layout()) throw_error(ErrorKind::Usage, "cannot save an empty chain");
  const BlockLayout& layout = *chain.layout();

  std::ofstream csv(base_path + ".csv");
  if (!csv) throw_error(ErrorKind::Io, "cannot open " + base_path + ".csv for writing");
  const std::vector<std::string> names = layout.coordinate_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    csv << (i ? "," : "") << names[i];
  }
  csv << "\n";
  char buf[32];
  for (const Eigen::VectorXd& draw : chain.draws()) {
    for (int i = 0; i < draw.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", draw[i]);
      csv << (i ? "," : "") << buf;
    }
    csv << "\n";
  }

  nlohmann::ordered_json meta;
  const ChainProvenance& prov = chain.provenance();
  meta["format_version"] = prov.format_version;
  meta["model_name"] = prov.model_name;
  meta["dataset_hash"] = hex64(prov.dataset_hash);
  meta["conditioned_rows_hash"] = hex64(prov.conditioned_rows_hash);
  meta["conditioned_row_count"] = prov.conditioned_row_count;
  meta["partition_label"] = prov.partition_label;
  meta["config_hash"] = hex64(prov.config_hash);
  meta["seed"] = prov.seed;
  meta["acceptance_rates"] = chain.acceptance_rates();
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (int b = 0; b < layout.block_count(); ++b) {
    const BlockSpec& spec = layout.spec(b);
    nlohmann::ordered_json jb;
    jb["name"] = spec.name;
    jb["size"] = spec.size;
    jb["support"] = support_name(spec.support);
    if (spec.support == Support::Count) {
      jb["lower"] = std::vector<double>(spec.lower.data(), spec.lower.data() + spec.lower.size());
      jb["upper"] = std::vector<double>(spec.upper.data(), spec.upper.data() + spec.upper.size());
    }
    blocks.push_back(std::move(jb));
  }
  meta["blocks"] = std::move(blocks);

  std::ofstream json_out(base_path + ".json");
  if (!json_out) throw_error(ErrorKind::Io, "cannot open " + base_path + ".json for writing");
  json_out << meta.dump(2) << "\n";
}

PosteriorChain load_chain(const std::string& base_path) {
  std::ifstream json_in(base_path + ".json");
  if (!json_in) throw_error(ErrorKind::Io, "cannot open " + base_path + ".json");
  nlohmann::json meta;
  try {
    json_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::Io, "bad chain sidecar " + base_path + ".json: " + e.what());
  }
  if (meta.value("format_version", "") != "voikit-chain-1") {
    throw_error(ErrorKind::Io, "unsupported chain format version in " + base_path + ".json");
  }

  std::vector<BlockSpec> specs;
  for (const auto& jb : meta.at("blocks")) {
    const std::string name = jb.at("name");
    const int size = jb.at("size");
    const Support support = support_from(jb.at("support"));
    if (support == Support::Count) {
      const std::vector<double> lo = jb.at("lower");
      const std::vector<double> hi = jb.at("upper");
      specs.push_back(BlockSpec::count(
          name, Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<long>(lo.size())),
          Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<long>(hi.size()))));
    } else {
      BlockSpec spec;
      spec.name = name;
      spec.size = size;
      spec.support = support;
      specs.push_back(std::move(spec));
    }
  }
  LayoutPtr layout = std::make_shared<BlockLayout>(std::move(specs));

  ChainProvenance prov;
  prov.format_version = meta.at("format_version");
  prov.model_name = meta.at("model_name");
  prov.dataset_hash = from_hex64(meta.at("dataset_hash"));
  prov.conditioned_rows_hash = from_hex64(meta.at("conditioned_rows_hash"));
  prov.conditioned_row_count = meta.at("conditioned_row_count");
  prov.partition_label = meta.at("partition_label");
  prov.config_hash = from_hex64(meta.at("config_hash"));
  prov.seed = meta.at("seed");

  std::map<std::string, double> acceptance;
  for (const auto& [key, val] : meta.at("acceptance_rates").items()) {
    acceptance[key] = val;
  }

  std::ifstream csv(base_path + ".csv");
  if (!csv) throw_error(ErrorKind::Io, "cannot open " + base_path + ".csv");
  std::string line;
  if (!std::getline(csv, line)) throw_error(ErrorKind::Io, "empty chain file " + base_path);
  std::vector<Eigen::VectorXd> draws;
  const int dim = layout->total_size();
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    Eigen::VectorXd draw(dim);
    std::stringstream ss(line);
    std::string cell;
    int i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i >= dim) throw_error(ErrorKind::Io, "chain row has too many columns");
      draw[i++] = std::strtod(cell.c_str(), nullptr);
    }
    if (i != dim) throw_error(ErrorKind::Io, "chain row has too few columns");
    draws.push_back(std::move(draw));
  }
  return PosteriorChain(layout, std::move(draws), std::move(prov), std::move(acceptance));
}

}  // namespace voi

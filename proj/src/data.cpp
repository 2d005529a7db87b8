#include "voi/data.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "voi/errors.hpp"
#include "voi/rng.hpp"

namespace voi {

namespace {

std::string row_key(const DataRow& r) {
  return r.source + "|" + std::to_string(r.site) + "|" + std::to_string(r.year);
}

std::string canonical_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void Dataset::validate_unique_keys() const {
  std::set<std::string> seen;
  for (const DataRow& r : rows_) {
    if (!seen.insert(row_key(r)).second) {
      throw_error(ErrorKind::Data, "duplicate (site, year, source) key: " + row_key(r));
    }
  }
}

void Dataset::set_population(int site, int year, double total) {
  if (total < 1.0) {
    throw_error(ErrorKind::Data, "population for site " + std::to_string(site) + ", year " +
                                     std::to_string(year) + " must be >= 1");
  }
  population_[{site, year}] = total;
}

bool Dataset::has_population(int site, int year) const {
  return population_.find({site, year}) != population_.end();
}

double Dataset::population(int site, int year) const {
  auto it = population_.find({site, year});
  if (it == population_.end()) {
    throw_error(ErrorKind::Data, "missing population entry for site " + std::to_string(site) +
                                     ", year " + std::to_string(year));
  }
  return it->second;
}

Dataset Dataset::subset(std::span<const int> row_indices) const {
  Dataset out;
  out.population_ = population_;
  out.rows_.reserve(row_indices.size());
  for (int i : row_indices) {
    if (i < 0 || i >= size()) {
      throw_error(ErrorKind::Usage, "row index " + std::to_string(i) + " out of range");
    }
    out.rows_.push_back(rows_[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::uint64_t Dataset::content_hash() const {
  std::vector<int> order(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return row_key(rows_[a]) < row_key(rows_[b]); });
  std::uint64_t h = fnv1a64("voikit-dataset-v1");
  for (int i : order) {
    const DataRow& r = rows_[static_cast<std::size_t>(i)];
    h = fnv1a64_combine(h, row_key(r));
    h = fnv1a64_combine(h, canonical_double(r.value) + "," + canonical_double(r.trials) + "," +
                               canonical_double(r.std_error) + "," + canonical_double(r.count));
  }
  for (const auto& [key, total] : population_) {
    h = fnv1a64_combine(h, std::to_string(key.first) + "@" + std::to_string(key.second) + "=" +
                               canonical_double(total));
  }
  return h;
}

std::uint64_t Dataset::rows_hash(std::span<const int> row_indices) const {
  std::vector<std::string> entries;
  entries.reserve(row_indices.size());
  for (int i : row_indices) {
    const DataRow& r = rows_[static_cast<std::size_t>(i)];
    entries.push_back(row_key(r) + "&" + canonical_double(r.value) + "," +
                      canonical_double(r.trials) + "," + canonical_double(r.std_error) + "," +
                      canonical_double(r.count));
  }
  std::sort(entries.begin(), entries.end());
  std::uint64_t h = fnv1a64("voikit-rows-v1");
  for (const std::string& e : entries) h = fnv1a64_combine(h, e);
  return h;
}

namespace {

std::string scheme_label(const DataRow& r, PartitionScheme scheme) {
  switch (scheme) {
    case PartitionScheme::BySource:
      return r.source;
    case PartitionScheme::BySite:
      return "site:" + std::to_string(r.site);
    case PartitionScheme::BySiteYear:
      return "site:" + std::to_string(r.site) + "/year:" + std::to_string(r.year);
    case PartitionScheme::Custom:
      if (r.label.empty()) {
        throw_error(ErrorKind::Data, "custom partition scheme requires a label on every row (" +
                                         row_key(r) + " has none)");
      }
      return r.label;
    case PartitionScheme::Single:
      return "all";
  }
  throw_error(ErrorKind::Usage, "unhandled partition scheme");
}

}  // namespace

std::vector<DataPartition> make_partitions(const Dataset& data, PartitionScheme scheme) {
  std::map<std::string, std::vector<int>> by_label;
  for (int i = 0; i < data.size(); ++i) {
    by_label[scheme_label(data.row(i), scheme)].push_back(i);
  }
  std::vector<DataPartition> out;
  out.reserve(by_label.size());
  for (const auto& [label, selected] : by_label) {
    DataPartition part;
    part.label = label;
    part.selected = selected;
    for (int i = 0; i < data.size(); ++i) {
      if (!std::binary_search(selected.begin(), selected.end(), i)) {
        part.complement.push_back(i);
      }
    }
    out.push_back(std::move(part));
  }
  return out;
}

void validate_partitions(const Dataset& data, std::span<const DataPartition> partitions) {
  std::vector<int> cover(static_cast<std::size_t>(data.size()), 0);
  for (const DataPartition& part : partitions) {
    std::vector<int> all;
    all.reserve(part.selected.size() + part.complement.size());
    all.insert(all.end(), part.selected.begin(), part.selected.end());
    all.insert(all.end(), part.complement.begin(), part.complement.end());
    std::sort(all.begin(), all.end());
    if (static_cast<int>(all.size()) != data.size() ||
        std::adjacent_find(all.begin(), all.end()) != all.end()) {
      throw_error(ErrorKind::Data,
                  "partition '" + part.label + "' does not tile the dataset exactly");
    }
    for (int i : part.selected) cover[static_cast<std::size_t>(i)] += 1;
  }
  for (std::size_t i = 0; i < cover.size(); ++i) {
    if (cover[i] != 1) {
      throw_error(ErrorKind::Data, "row " + std::to_string(i) + " selected by " +
                                       std::to_string(cover[i]) + " partitions (expected 1)");
    }
  }
}

PartitionScheme parse_partition_scheme(const std::string& name) {
  if (name == "by-source") return PartitionScheme::BySource;
  if (name == "by-site") return PartitionScheme::BySite;
  if (name == "by-site-year") return PartitionScheme::BySiteYear;
  if (name == "custom") return PartitionScheme::Custom;
  if (name == "single") return PartitionScheme::Single;
  throw_error(ErrorKind::Config, "unknown partition scheme '" + name + "'");
}

std::string to_string(PartitionScheme scheme) {
  switch (scheme) {
    case PartitionScheme::BySource:
      return "by-source";
    case PartitionScheme::BySite:
      return "by-site";
    case PartitionScheme::BySiteYear:
      return "by-site-year";
    case PartitionScheme::Custom:
      return "custom";
    case PartitionScheme::Single:
      return "single";
  }
  return "?";
}

}  // namespace voi

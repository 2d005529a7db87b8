#include "voi/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include "voi/csv.hpp"
#include "voi/errors.hpp"
#include "voi/models/ukraine.hpp"

namespace voi {

namespace {

class ErrorLog {
 public:
  void add(const std::string& file, int line, const std::string& what) {
    items_.push_back(file + ":" + std::to_string(line) + ": " + what);
  }
  bool empty() const { return items_.empty(); }
  [[noreturn]] void raise() const {
    std::string message = std::to_string(items_.size()) + " ingestion error(s):";
    for (const std::string& item : items_) message += "\n  " + item;
    throw_error(ErrorKind::Data, message);
  }

 private:
  std::vector<std::string> items_;
};

bool parse_number(const std::string& raw, double& out) {
  if (raw.empty()) return false;
  char* end = nullptr;
  out = std::strtod(raw.c_str(), &end);
  return end != raw.c_str() && *end == '\0' && std::isfinite(out);
}

bool parse_int(const std::string& raw, int& out) {
  double v = 0.0;
  if (!parse_number(raw, v) || v != std::floor(v)) return false;
  out = static_cast<int>(v);
  return true;
}

}  // namespace

std::string IngestReport::render() const {
  std::stringstream out;
  out << "rows per (source, year):\n";
  out << "  year";
  for (const std::string& source : sources) out << "  " << source;
  out << "\n";
  for (int year : years) {
    out << "  " << year;
    for (const std::string& source : sources) {
      auto it = cell_counts.find({source, year});
      const int count = it == cell_counts.end() ? 0 : it->second;
      out << "  " << std::string(source.size() > 3 ? source.size() - 3 : 0, ' ') << count;
    }
    out << "\n";
  }
  out << "total rows: " << row_count << "\n";
  return out.str();
}

Dataset ingest(const IngestPaths& paths, IngestReport* report, bool split_ngo_by_year) {
  ErrorLog errors;
  Dataset data;

  // population table first, so row-level population checks can run
  const CsvTable pop = read_csv(paths.population);
  {
    const int c_site = pop.required_column("site_id");
    const int c_year = pop.required_column("year");
    const int c_pop = pop.required_column("population");
    for (std::size_t r = 0; r < pop.rows.size(); ++r) {
      const auto& row = pop.rows[r];
      const int line = pop.line_numbers[r];
      int site = 0, year = 0;
      double total = 0.0;
      if (!parse_int(row[c_site], site)) {
        errors.add(pop.path, line, "non-integer site_id '" + row[c_site] + "'");
        continue;
      }
      if (!parse_int(row[c_year], year)) {
        errors.add(pop.path, line, "non-integer year '" + row[c_year] + "'");
        continue;
      }
      if (!parse_number(row[c_pop], total) || total < 1.0) {
        errors.add(pop.path, line, "population must be a number >= 1");
        continue;
      }
      if (data.has_population(site, year)) {
        errors.add(pop.path, line, "duplicate population entry for site " +
                                       std::to_string(site) + ", year " + std::to_string(year));
        continue;
      }
      data.set_population(site, year, std::floor(total));
    }
  }

  std::set<std::string> seen_keys;
  auto check_key = [&](const std::string& file, int line, const DataRow& row) {
    const std::string key =
        row.source + "|" + std::to_string(row.site) + "|" + std::to_string(row.year);
    if (!seen_keys.insert(key).second) {
      errors.add(file, line, "duplicate (site, year, source) key " + key);
      return false;
    }
    return true;
  };
  auto check_population = [&](const std::string& file, int line, int site, int year) {
    if (!data.has_population(site, year)) {
      errors.add(file, line, "missing population entry for site " + std::to_string(site) +
                                 ", year " + std::to_string(year));
      return false;
    }
    return true;
  };

  const CsvTable mult = read_csv(paths.multiplier);
  {
    const int c_site = mult.required_column("site_id");
    const int c_year = mult.required_column("year");
    const int c_sub = mult.required_column("subgroup");
    const int c_prop = mult.required_column("proportion_estimate");
    const int c_size = mult.required_column("sample_size");
    const int c_count = mult.required_column("subgroup_count");
    const int c_label = mult.column("label");
    for (std::size_t r = 0; r < mult.rows.size(); ++r) {
      const auto& row = mult.rows[r];
      const int line = mult.line_numbers[r];
      DataRow out;
      int site = 0, year = 0;
      double prop = 0.0, size = 0.0, count = 0.0;
      bool ok = true;
      if (!parse_int(row[c_site], site)) {
        errors.add(mult.path, line, "non-integer site_id '" + row[c_site] + "'");
        ok = false;
      }
      if (!parse_int(row[c_year], year)) {
        errors.add(mult.path, line, "non-integer year '" + row[c_year] + "'");
        ok = false;
      }
      if (row[c_sub].empty()) {
        errors.add(mult.path, line, "empty subgroup name");
        ok = false;
      }
      if (!parse_number(row[c_prop], prop) || !(prop > 0.0) || !(prop < 1.0)) {
        errors.add(mult.path, line,
                   "proportion_estimate must lie strictly in (0, 1), got '" + row[c_prop] + "'");
        ok = false;
      }
      if (!parse_number(row[c_size], size) || size < 1.0) {
        errors.add(mult.path, line, "sample_size must be >= 1");
        ok = false;
      }
      if (!parse_number(row[c_count], count) || count < 0.0 || count != std::floor(count)) {
        errors.add(mult.path, line, "subgroup_count must be a nonnegative integer");
        ok = false;
      }
      if (!ok) continue;
      if (!check_population(mult.path, line, site, year)) continue;
      out.source = row[c_sub];
      if (split_ngo_by_year && out.source == "NGO") {
        out.source = "NGO:" + std::to_string(year);
      }
      out.site = site;
      out.year = year;
      out.value = prop;
      out.trials = size;
      out.count = count;
      if (c_label >= 0) out.label = row[static_cast<std::size_t>(c_label)];
      if (!check_key(mult.path, line, out)) continue;
      data.add_row(std::move(out));
    }
  }

  const CsvTable nsu = read_csv(paths.nsu);
  {
    const int c_site = nsu.required_column("site_id");
    const int c_year = nsu.required_column("year");
    const int c_est = nsu.required_column("estimate");
    const int c_err = nsu.required_column("std_error");
    const int c_label = nsu.column("label");
    for (std::size_t r = 0; r < nsu.rows.size(); ++r) {
      const auto& row = nsu.rows[r];
      const int line = nsu.line_numbers[r];
      DataRow out;
      int site = 0, year = 0;
      double est = 0.0, err = 0.0;
      bool ok = true;
      if (!parse_int(row[c_site], site)) {
        errors.add(nsu.path, line, "non-integer site_id '" + row[c_site] + "'");
        ok = false;
      }
      if (!parse_int(row[c_year], year)) {
        errors.add(nsu.path, line, "non-integer year '" + row[c_year] + "'");
        ok = false;
      }
      if (!parse_number(row[c_est], est) || !(est > 0.0)) {
        errors.add(nsu.path, line, "estimate must be a positive number");
        ok = false;
      }
      if (!parse_number(row[c_err], err) || !(err > 0.0)) {
        errors.add(nsu.path, line, "std_error must be a positive number");
        ok = false;
      }
      if (!ok) continue;
      if (!check_population(nsu.path, line, site, year)) continue;
      out.source = kNetworkScaleUpSource;
      out.site = site;
      out.year = year;
      out.value = est;
      out.std_error = err;
      if (c_label >= 0) out.label = row[static_cast<std::size_t>(c_label)];
      if (!check_key(nsu.path, line, out)) continue;
      data.add_row(std::move(out));
    }
  }

  if (!errors.empty()) errors.raise();

  if (report) {
    std::set<std::string> sources;
    std::set<int> years;
    for (const DataRow& row : data.rows()) {
      report->cell_counts[{row.source, row.year}] += 1;
      if (row.source != kNetworkScaleUpSource) sources.insert(row.source);
      years.insert(row.year);
    }
    report->sources.assign(sources.begin(), sources.end());
    report->sources.push_back(kNetworkScaleUpSource);
    report->years.assign(years.begin(), years.end());
    report->row_count = data.size();
  }
  return data;
}

void write_dataset(const Dataset& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<std::string>> mult_rows, nsu_rows, pop_rows;
  for (const DataRow& row : data.rows()) {
    if (row.source == kNetworkScaleUpSource) {
      nsu_rows.push_back({std::to_string(row.site), std::to_string(row.year),
                          format_number(row.value), format_number(row.std_error)});
    } else {
      mult_rows.push_back({std::to_string(row.site), std::to_string(row.year), row.source,
                           format_number(row.value), format_number(row.trials),
                           format_number(row.count)});
    }
  }
  for (const auto& [key, total] : data.population_table()) {
    pop_rows.push_back(
        {std::to_string(key.first), std::to_string(key.second), format_number(total)});
  }
  write_csv(dir + "/multiplier.csv",
            {"site_id", "year", "subgroup", "proportion_estimate", "sample_size",
             "subgroup_count"},
            mult_rows);
  write_csv(dir + "/nsu.csv", {"site_id", "year", "estimate", "std_error"}, nsu_rows);
  write_csv(dir + "/population.csv", {"site_id", "year", "population"}, pop_rows);
}

}  // namespace voi

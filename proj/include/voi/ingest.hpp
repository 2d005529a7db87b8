#pragma once

#include <map>
#include <string>
#include <vector>

#include "voi/data.hpp"

namespace voi {

struct IngestPaths {
  std::string multiplier;  // site_id, year, subgroup, proportion_estimate,
                           // sample_size, subgroup_count [, label]
  std::string nsu;         // site_id, year, estimate, std_error [, label]
  std::string population;  // site_id, year, population
};

struct IngestReport {
  // rows per (source, year) in the observation-table layout
  std::map<std::pair<std::string, int>, int> cell_counts;
  std::vector<std::string> sources;  // sorted, scale-up last
  std::vector<int> years;            // sorted
  int row_count = 0;

  std::string render() const;  // printable counts matrix
};

// Validated dataset from the three CSV files. Every violation is reported
// with its file and line number; all errors are gathered before failing.
Dataset ingest(const IngestPaths& paths, IngestReport* report = nullptr,
               bool split_ngo_by_year = false);

// Writes a dataset back out as the three-file bundle (used by `simulate`).
void write_dataset(const Dataset& data, const std::string& dir);

}  // namespace voi

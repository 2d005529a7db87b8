#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace voi {

// One observation row, keyed by (site, year, source). The value fields a row
// uses depend on its source kind:
//   multiplier subgroup row: value = proportion estimate P, trials = survey
//     size G, count = known subgroup total Y
//   network scale-up row:    value = size estimate N, std_error = S
//   toy-model rows:          value = y, trials = number of binomial trials
// `population` is filled when the row serves as a simulation pattern cell.
struct DataRow {
  std::string source;
  int site = 0;
  int year = 0;
  double value = 0.0;
  double trials = 0.0;
  double std_error = 0.0;
  double count = 0.0;
  double population = 0.0;
  std::string label;  // custom partition label (optional)
};

// Tabular multi-source observations plus the known population table.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<DataRow> rows) : rows_(std::move(rows)) { validate_unique_keys(); }

  const std::vector<DataRow>& rows() const { return rows_; }
  const DataRow& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(rows_.size()); }
  bool empty() const { return rows_.empty(); }

  void add_row(DataRow row) { rows_.push_back(std::move(row)); }
  void validate_unique_keys() const;  // data error on duplicate (site, year, source)

  void set_population(int site, int year, double total);
  bool has_population(int site, int year) const;
  double population(int site, int year) const;  // data error when missing
  const std::map<std::pair<int, int>, double>& population_table() const { return population_; }

  // New dataset with the given rows (population table shared unchanged).
  Dataset subset(std::span<const int> row_indices) const;

  // Stable content hash over canonically ordered rows and populations.
  std::uint64_t content_hash() const;
  std::uint64_t rows_hash(std::span<const int> row_indices) const;

 private:
  std::vector<DataRow> rows_;
  std::map<std::pair<int, int>, double> population_;
};

// A labeled piece Y_i of the dataset together with its complement Y_{-i}.
struct DataPartition {
  std::string label;
  std::vector<int> selected;
  std::vector<int> complement;
};

enum class PartitionScheme { BySource, BySite, BySiteYear, Custom, Single };

std::vector<DataPartition> make_partitions(const Dataset& data, PartitionScheme scheme);

// Tiling invariant: labels cover every row exactly once, selector and
// complement are disjoint and exhaustive. Throws a data error otherwise.
void validate_partitions(const Dataset& data, std::span<const DataPartition> partitions);

PartitionScheme parse_partition_scheme(const std::string& name);  // config error on unknown
std::string to_string(PartitionScheme scheme);

}  // namespace voi

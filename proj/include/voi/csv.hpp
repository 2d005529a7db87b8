#pragma once

#include <string>
#include <vector>

namespace voi {

// Minimal CSV: comma-separated, header row required, no quoting (none of the
// project's formats need embedded commas). Cells are trimmed.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based, parallel to rows

  int column(const std::string& name) const;           // -1 when absent
  int required_column(const std::string& name) const;  // data error when absent
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_number(double x);  // stable %.10g rendering for tables

}  // namespace voi

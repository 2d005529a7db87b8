#include "voi/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "voi/errors.hpp"

namespace voi {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int CsvTable::required_column(const std::string& name) const {
  const int idx = column(name);
  if (idx < 0) {
    throw_error(ErrorKind::Data, path + ": missing required column '" + name + "'");
  }
  return idx;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open " + path);
  CsvTable table;
  table.path = path;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    line_number += 1;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (table.header.empty()) {
      table.header = split_line(trimmed);
    } else {
      table.rows.push_back(split_line(trimmed));
      table.line_numbers.push_back(line_number);
    }
  }
  if (table.header.empty()) throw_error(ErrorKind::Data, path + ": missing header row");
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::Io, "cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace voi

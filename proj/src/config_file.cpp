#include "voi/config_file.hpp"

#include <cstdlib>
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

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> items;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) items.push_back(t);
  }
  return items;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
  KeyValueConfig config;
  config.origin_ = origin.empty() ? "<config>" : origin;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(ss, line)) {
    line_number += 1;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw_error(ErrorKind::Config, config.origin_ + ":" + std::to_string(line_number) +
                                           ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw_error(ErrorKind::Config, config.origin_ + ":" + std::to_string(line_number) +
                                           ": empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw_error(ErrorKind::Config, config.origin_ + ":" + std::to_string(line_number) +
                                         ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw_error(ErrorKind::Config,
                  config.origin_ + ":" + std::to_string(line_number) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!config.values_.emplace(full, value).second) {
      throw_error(ErrorKind::Config, config.origin_ + ":" + std::to_string(line_number) +
                                         ": duplicate key '" + full + "'");
    }
  }
  return config;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) {
    throw_error(ErrorKind::Config, origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

double KeyValueConfig::parse_double(const std::string& key, const std::string& raw) const {
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') {
    throw_error(ErrorKind::Config, origin_ + ": key '" + key + "' has non-numeric value '" +
                                       raw + "'");
  }
  return v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  return static_cast<long>(get_double(key, static_cast<double>(fallback)));
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(get_double(key, fallback));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    throw_error(ErrorKind::Config, origin_ + ": key '" + key + "' has non-integer value");
  }
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw_error(ErrorKind::Config, origin_ + ": key '" + key + "' has non-boolean value '" + v +
                                     "'");
}

std::vector<std::string> KeyValueConfig::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : split_list(it->second);
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  for (const std::string& item : split_list(it->second)) {
    out.push_back(static_cast<int>(parse_double(key, item)));
  }
  return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(it->second)) out.push_back(parse_double(key, item));
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::vector<std::string> KeyValueConfig::unknown_keys(const std::set<std::string>& known) const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) unknown.push_back(key);
  }
  return unknown;
}

}  // namespace voi

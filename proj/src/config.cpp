#include "kglp/config.hpp"

#include <fstream>

#include "kglp/error.hpp"

namespace kglp {

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot read " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("config: malformed line at " + path + ":" + std::to_string(lineno));
    cfg.kv_[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return cfg;
}

std::string RunConfig::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw Error("config: missing required key '" + key + "'");
  return it->second;
}

std::string RunConfig::str_or(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double RunConfig::dbl_or(const std::string& key, double def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw Error("config: '" + key + "' is not a number: " + it->second);
  }
}

std::int64_t RunConfig::i64_or(const std::string& key, std::int64_t def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stoll(it->second);
  } catch (...) {
    throw Error("config: '" + key + "' is not an integer: " + it->second);
  }
}

std::uint64_t RunConfig::u64_or(const std::string& key, std::uint64_t def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stoull(it->second);
  } catch (...) {
    throw Error("config: '" + key + "' is not an integer: " + it->second);
  }
}

bool RunConfig::flag_or(const std::string& key, bool def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: '" + key + "' is not a boolean: " + v);
}

std::vector<std::string> RunConfig::list_or(const std::string& key,
                                            const std::vector<std::string>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::string& v = it->second;
  while (start <= v.size()) {
    std::size_t comma = v.find(',', start);
    if (comma == std::string::npos) {
      if (start < v.size()) out.push_back(v.substr(start));
      break;
    }
    if (comma > start) out.push_back(v.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::array<double, 3> RunConfig::ratios_or(const std::string& key,
                                           std::array<double, 3> def) const {
  auto parts = list_or(key, {});
  if (parts.empty()) return def;
  if (parts.size() != 3) throw Error("config: '" + key + "' needs three fractions");
  return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
}

std::vector<int> RunConfig::ints_or(const std::string& key,
                                    const std::vector<int>& def) const {
  auto parts = list_or(key, {});
  if (parts.empty()) return def;
  std::vector<int> out;
  for (const auto& p : parts) out.push_back(std::stoi(p));
  return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::header() const {
  return {kv_.begin(), kv_.end()};
}

}  // namespace kglp

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kglp {

// Flat key=value run configuration: one file plus command-line overrides
// (overrides win). The resolved map is embedded verbatim in every report.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string str(const std::string& key) const;  // throws when missing
  std::string str_or(const std::string& key, const std::string& def) const;
  double dbl_or(const std::string& key, double def) const;
  std::int64_t i64_or(const std::string& key, std::int64_t def) const;
  std::uint64_t u64_or(const std::string& key, std::uint64_t def) const;
  bool flag_or(const std::string& key, bool def) const;
  std::vector<std::string> list_or(const std::string& key,
                                   const std::vector<std::string>& def) const;
  std::array<double, 3> ratios_or(const std::string& key,
                                  std::array<double, 3> def) const;
  std::vector<int> ints_or(const std::string& key, const std::vector<int>& def) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  std::vector<std::pair<std::string, std::string>> header() const;

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace kglp

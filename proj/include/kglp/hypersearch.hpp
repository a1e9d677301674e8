#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kglp/rng.hpp"

namespace kglp {

// One searchable parameter domain: real range (linear or log scale),
// inclusive integer range, or categorical set.
struct ParamDomain {
  enum class Kind { Real, Int, Cat };
  Kind kind = Kind::Real;
  bool log_scale = false;
  double lo = 0, hi = 0;
  std::int64_t ilo = 0, ihi = 0;
  std::vector<std::string> choices;

  static ParamDomain real(double lo, double hi, bool log_scale = false);
  static ParamDomain integer(std::int64_t lo, std::int64_t hi);
  static ParamDomain categorical(std::vector<std::string> choices);
};

using ParamValue = std::variant<double, std::int64_t, std::string>;
using Assignment = std::map<std::string, ParamValue>;

std::string to_string(const ParamValue& v);

struct SearchSpace {
  std::vector<std::pair<std::string, ParamDomain>> params;
  void validate() const;
};

// Independent uniform draw per domain; log-scale ranges are uniform in
// log-space.
Assignment sample(const SearchSpace& space, Rng& rng);

enum class TrialStatus { Complete, Pruned, Failed };

struct TrialRecord {
  int id = 0;
  Assignment params;
  std::vector<std::pair<int, double>> intermediates;  // (step, value)
  std::optional<double> final_value;
  TrialStatus status = TrialStatus::Complete;
};

struct PrunerConfig {
  int warmup = 5;  // trials that must have reported at a step before pruning
  int grace = 2;   // steps a trial is always allowed
};

// Median rule: prune iff at least `warmup` other trials reported a value at
// this step and the trial's value is strictly below their median. Higher is
// better.
bool should_prune(const std::vector<TrialRecord>& history, const TrialRecord& trial,
                  int step, const PrunerConfig& cfg = {});

// Handed to the objective; report() returns true when the trial should stop.
class TrialReporter {
 public:
  TrialReporter(const std::vector<TrialRecord>& history, TrialRecord& trial,
                const PrunerConfig& cfg)
      : history_(history), trial_(trial), cfg_(cfg) {}

  bool report(int step, double value);
  bool pruned() const { return pruned_; }

 private:
  const std::vector<TrialRecord>& history_;
  TrialRecord& trial_;
  PrunerConfig cfg_;
  bool pruned_ = false;
};

// Maximized objective: reports intermediate validation values through the
// reporter and returns the final value.
using Objective = std::function<double(const Assignment&, TrialReporter&)>;

struct SearchResult {
  Assignment best;
  double best_value = 0;
  std::vector<TrialRecord> trials;
};

// Serial random search over `budget` trials (pruned trials count). Failed
// trials (objective threw) are recorded; throws only if every trial failed.
SearchResult search(const Objective& objective, const SearchSpace& space, int budget,
                    std::uint64_t seed, const PrunerConfig& pruner = {});

// Append-only CSV: trial, status, params as key=value list, final value.
void write_trial_log(const std::vector<TrialRecord>& trials, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header);

}  // namespace kglp

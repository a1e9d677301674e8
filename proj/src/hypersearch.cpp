#include "kglp/hypersearch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kglp/error.hpp"

namespace kglp {

ParamDomain ParamDomain::real(double lo, double hi, bool log_scale) {
  ParamDomain d;
  d.kind = Kind::Real;
  d.lo = lo;
  d.hi = hi;
  d.log_scale = log_scale;
  return d;
}

ParamDomain ParamDomain::integer(std::int64_t lo, std::int64_t hi) {
  ParamDomain d;
  d.kind = Kind::Int;
  d.ilo = lo;
  d.ihi = hi;
  return d;
}

ParamDomain ParamDomain::categorical(std::vector<std::string> choices) {
  ParamDomain d;
  d.kind = Kind::Cat;
  d.choices = std::move(choices);
  return d;
}

std::string to_string(const ParamValue& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  if (std::holds_alternative<std::int64_t>(v))
    return std::to_string(std::get<std::int64_t>(v));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", std::get<double>(v));
  return buf;
}

void SearchSpace::validate() const {
  if (params.empty()) throw Error("search space: no parameters");
  for (const auto& [name, d] : params) {
    switch (d.kind) {
      case ParamDomain::Kind::Real:
        if (!(d.lo <= d.hi)) throw Error("search space: empty real range for " + name);
        if (d.log_scale && !(d.lo > 0))
          throw Error("search space: log range must be positive for " + name);
        break;
      case ParamDomain::Kind::Int:
        if (d.ilo > d.ihi) throw Error("search space: empty int range for " + name);
        break;
      case ParamDomain::Kind::Cat:
        if (d.choices.empty()) throw Error("search space: empty categorical for " + name);
        break;
    }
  }
}

Assignment sample(const SearchSpace& space, Rng& rng) {
  space.validate();
  Assignment out;
  for (const auto& [name, d] : space.params) {
    switch (d.kind) {
      case ParamDomain::Kind::Real: {
        double x = d.log_scale
                       ? std::exp(rng.uniform(std::log(d.lo), std::log(d.hi)))
                       : rng.uniform(d.lo, d.hi);
        out.emplace(name, x);
        break;
      }
      case ParamDomain::Kind::Int: {
        std::uint64_t span = static_cast<std::uint64_t>(d.ihi - d.ilo) + 1;
        out.emplace(name, d.ilo + static_cast<std::int64_t>(rng.below(span)));
        break;
      }
      case ParamDomain::Kind::Cat:
        out.emplace(name, d.choices[rng.index(d.choices.size())]);
        break;
    }
  }
  return out;
}

bool should_prune(const std::vector<TrialRecord>& history, const TrialRecord& trial,
                  int step, const PrunerConfig& cfg) {
  if (step < cfg.grace) return false;
  double value = 0;
  bool found = false;
  for (const auto& [s, v] : trial.intermediates)
    if (s == step) {
      value = v;
      found = true;
    }
  if (!found) throw Error("should_prune: trial has no value at step");

  std::vector<double> prior;
  for (const auto& other : history) {
    if (other.id == trial.id) continue;
    for (const auto& [s, v] : other.intermediates)
      if (s == step) prior.push_back(v);
  }
  if (static_cast<int>(prior.size()) < cfg.warmup) return false;
  std::sort(prior.begin(), prior.end());
  std::size_t n = prior.size();
  double median = n % 2 ? prior[n / 2] : 0.5 * (prior[n / 2 - 1] + prior[n / 2]);
  return value < median;
}

bool TrialReporter::report(int step, double value) {
  trial_.intermediates.emplace_back(step, value);
  if (!pruned_ && should_prune(history_, trial_, step, cfg_)) pruned_ = true;
  return pruned_;
}

SearchResult search(const Objective& objective, const SearchSpace& space, int budget,
                    std::uint64_t seed, const PrunerConfig& pruner) {
  if (budget < 1) throw Error("search: budget must be >= 1");
  space.validate();
  Rng rng = Rng(seed).stream("search");

  SearchResult result;
  bool have_best = false;
  for (int id = 0; id < budget; ++id) {
    TrialRecord trial;
    trial.id = id;
    trial.params = sample(space, rng);
    TrialReporter reporter(result.trials, trial, pruner);
    try {
      double value = objective(trial.params, reporter);
      if (reporter.pruned()) {
        trial.status = TrialStatus::Pruned;
      } else {
        trial.status = TrialStatus::Complete;
        trial.final_value = value;
        if (!have_best || value > result.best_value) {
          have_best = true;
          result.best_value = value;
          result.best = trial.params;
        }
      }
    } catch (const std::exception&) {
      trial.status = TrialStatus::Failed;
    }
    result.trials.push_back(std::move(trial));
  }
  if (!have_best) throw Error("search: all trials failed or were pruned");
  return result;
}

void write_trial_log(const std::vector<TrialRecord>& trials, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream out(path);
  if (!out) throw Error("write_trial_log: cannot write " + path);
  for (const auto& [k, v] : header) out << "# " << k << '=' << v << '\n';
  out << "trial,status,params,final_value\n";
  for (const auto& t : trials) {
    const char* status = t.status == TrialStatus::Complete ? "complete"
                         : t.status == TrialStatus::Pruned ? "pruned"
                                                           : "failed";
    out << t.id << ',' << status << ',';
    bool first = true;
    for (const auto& [name, value] : t.params) {
      if (!first) out << ' ';
      out << name << '=' << to_string(value);
      first = false;
    }
    out << ',';
    if (t.final_value) out << to_string(ParamValue{*t.final_value});
    out << '\n';
  }
}

}  // namespace kglp

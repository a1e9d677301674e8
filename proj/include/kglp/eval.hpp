#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "kglp/graph.hpp"

namespace kglp {

// Lower score = better candidate. Baselines with higher-is-better scores
// plug in via negation.
using Scorer = std::function<double(std::int32_t disease, std::int32_t candidate)>;

// One filtered ranking query: rank `true_gene` for `disease` against all
// candidates after removing candidates that form a known-true triple. The
// query's own true gene is never filtered.
struct RankingQuery {
  std::int32_t disease;
  std::int32_t rel;
  std::int32_t true_gene;
  const std::vector<std::int32_t>* candidates;  // type-restricted pool
  const TripleSet* filter;                      // known-true triples
};

struct RankEntry {
  double rank;             // mean of best and worst tie position
  std::size_t candidates;  // surviving pool size, true gene included
};

// Counts survivors strictly better than / tied with the true gene; no sort.
RankEntry rank_one(const Scorer& scorer, const RankingQuery& query);

// Rank derived from an explicit ranked candidate list (the baselines' output
// convention): filtered entries are dropped; a true gene absent from the
// list gets rank = list length + midpoint of the remaining candidates.
RankEntry rank_from_list(const std::vector<std::int32_t>& ranked, const RankingQuery& query);

struct QueryRecord {
  std::string disease;
  std::string gene;
  double rank;
  std::size_t candidates;
};

struct MetricsReport {
  std::vector<int> ks;
  std::vector<double> hit;  // hit@ks[i]
  double mean_rank = 0;
  double mean_percentile = 0;  // 100*(C-rank)/(C-1), 100 when C == 1
  std::size_t queries = 0;
  std::vector<QueryRecord> per_query;
};

MetricsReport aggregate(const std::vector<RankEntry>& entries, const std::vector<int>& ks);

enum class Direction { LowerIsBetter, HigherIsBetter };

// Percentage change relative to `before`; positive = improvement in the
// stated direction.
double relative_change(double before, double after, Direction direction);

struct CurvePoint {
  int j;
  int hits;
  double precision;
  double recall;
};

// Cumulative hits and precision/recall of the top-K prefix of a ranked list
// against a truth set.
std::vector<CurvePoint> compare_external(const std::vector<std::string>& ranked,
                                         const std::set<std::string>& truth, int K);

// Runs filtered ranking over `queries` (one per test triple) and aggregates.
MetricsReport evaluate_queries(const Scorer& scorer,
                               const std::vector<IndexedTriple>& queries,
                               const std::vector<std::int32_t>& candidates,
                               const TripleSet& filter, const std::vector<int>& ks,
                               const KnowledgeGraph& g);

void write_metrics_csv(const MetricsReport& report, const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& header);
void write_per_query_tsv(const MetricsReport& report, const std::string& path);
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header);

}  // namespace kglp

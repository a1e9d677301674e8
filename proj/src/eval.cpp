#include "kglp/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "kglp/error.hpp"

namespace kglp {

namespace {

bool filtered_out(const RankingQuery& q, std::int32_t candidate) {
  if (candidate == q.true_gene) return false;  // own true gene never filtered
  return q.filter && q.filter->contains(q.disease, q.rel, candidate);
}

void write_header(std::ofstream& out,
                  const std::vector<std::pair<std::string, std::string>>& header) {
  for (const auto& [k, v] : header) out << "# " << k << '=' << v << '\n';
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace

RankEntry rank_one(const Scorer& scorer, const RankingQuery& q) {
  double true_score = scorer(q.disease, q.true_gene);
  std::size_t better = 0, tied = 0, survivors = 0;
  for (std::int32_t c : *q.candidates) {
    if (c == q.true_gene) {
      ++survivors;
      continue;
    }
    if (filtered_out(q, c)) continue;
    ++survivors;
    double s = scorer(q.disease, c);
    if (s < true_score) ++better;
    else if (s == true_score) ++tied;
  }
  // Mean of the best and worst position within the tie block.
  double rank = static_cast<double>(better) + 1.0 + static_cast<double>(tied) / 2.0;
  return {rank, survivors};
}

RankEntry rank_from_list(const std::vector<std::int32_t>& ranked, const RankingQuery& q) {
  std::size_t survivors = 0;
  for (std::int32_t c : *q.candidates)
    if (c == q.true_gene || !filtered_out(q, c)) ++survivors;

  std::size_t kept = 0;
  bool found = false;
  double rank = 0;
  for (std::int32_t c : ranked) {
    if (filtered_out(q, c)) continue;
    ++kept;
    if (c == q.true_gene) {
      rank = static_cast<double>(kept);
      found = true;
      break;
    }
  }
  if (!found) {
    std::size_t list_len = 0;
    for (std::int32_t c : ranked)
      if (!filtered_out(q, c)) ++list_len;
    // Consistent tail convention: midpoint of the candidates the list never
    // reached.
    double remaining = static_cast<double>(survivors - list_len);
    rank = static_cast<double>(list_len) + (remaining + 1.0) / 2.0;
  }
  return {rank, survivors};
}

MetricsReport aggregate(const std::vector<RankEntry>& entries, const std::vector<int>& ks) {
  if (entries.empty()) throw Error("aggregate: no queries");
  MetricsReport report;
  report.ks = ks;
  report.hit.assign(ks.size(), 0.0);
  report.queries = entries.size();
  double mr = 0, mp = 0;
  for (const auto& e : entries) {
    mr += e.rank;
    if (e.candidates <= 1) {
      mp += 100.0;
    } else {
      mp += 100.0 * (static_cast<double>(e.candidates) - e.rank) /
            (static_cast<double>(e.candidates) - 1.0);
    }
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (e.rank <= static_cast<double>(ks[i])) report.hit[i] += 1.0;
  }
  const double n = static_cast<double>(entries.size());
  for (double& h : report.hit) h /= n;
  report.mean_rank = mr / n;
  report.mean_percentile = mp / n;
  return report;
}

double relative_change(double before, double after, Direction direction) {
  if (before == 0) throw Error("relative_change: zero baseline");
  if (direction == Direction::LowerIsBetter) return 100.0 * (before - after) / before;
  return 100.0 * (after - before) / before;
}

std::vector<CurvePoint> compare_external(const std::vector<std::string>& ranked,
                                         const std::set<std::string>& truth, int K) {
  if (truth.empty()) throw Error("compare_external: empty truth set");
  if (K > static_cast<int>(ranked.size()))
    throw Error("compare_external: K exceeds list length");
  std::vector<CurvePoint> curve;
  curve.reserve(K);
  int hits = 0;
  for (int j = 1; j <= K; ++j) {
    if (truth.count(ranked[j - 1])) ++hits;
    curve.push_back({j, hits, static_cast<double>(hits) / j,
                     static_cast<double>(hits) / static_cast<double>(truth.size())});
  }
  return curve;
}

MetricsReport evaluate_queries(const Scorer& scorer,
                               const std::vector<IndexedTriple>& queries,
                               const std::vector<std::int32_t>& candidates,
                               const TripleSet& filter, const std::vector<int>& ks,
                               const KnowledgeGraph& g) {
  std::vector<RankEntry> entries;
  entries.reserve(queries.size());
  std::vector<QueryRecord> records;
  for (const auto& q : queries) {
    RankingQuery query{q.head, q.rel, q.tail, &candidates, &filter};
    RankEntry e = rank_one(scorer, query);
    entries.push_back(e);
    records.push_back({g.node_id(q.head), g.node_id(q.tail), e.rank, e.candidates});
  }
  MetricsReport report = aggregate(entries, ks);
  report.per_query = std::move(records);
  return report;
}

void write_metrics_csv(const MetricsReport& report, const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream out(path);
  if (!out) throw Error("write_metrics_csv: cannot write " + path);
  write_header(out, header);
  out << "# mp_formula=100*(C-rank)/(C-1)\n";
  out << "metric,value\n";
  for (std::size_t i = 0; i < report.ks.size(); ++i)
    out << "hit@" << report.ks[i] << ',' << fmt(report.hit[i]) << '\n';
  out << "mean_rank," << fmt(report.mean_rank) << '\n';
  out << "mean_percentile," << fmt(report.mean_percentile) << '\n';
  out << "queries," << report.queries << '\n';
}

void write_per_query_tsv(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_per_query_tsv: cannot write " + path);
  out << "# disease\tgene\trank\tcandidates\n";
  for (const auto& r : report.per_query)
    out << r.disease << '\t' << r.gene << '\t' << fmt(r.rank) << '\t' << r.candidates << '\n';
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream out(path);
  if (!out) throw Error("write_curve_csv: cannot write " + path);
  write_header(out, header);
  out << "j,hits,precision,recall\n";
  for (const auto& p : curve)
    out << p.j << ',' << p.hits << ',' << fmt(p.precision) << ',' << fmt(p.recall) << '\n';
}

}  // namespace kglp

#include "kglp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "kglp/error.hpp"

namespace kglp {

namespace {

constexpr int kRwrIterationCap = 10000;

std::vector<std::int32_t> canonical_seeds(const GeneNetwork& net, const SeedSet& seed) {
  if (seed.seeds.empty()) throw Error("baselines: empty seed set");
  std::vector<std::int32_t> s = seed.seeds;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (std::int32_t v : s)
    if (v < 0 || v >= static_cast<std::int32_t>(net.size()))
      throw Error("baselines: seed index out of range");
  return s;
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

}  // namespace

std::int32_t GeneNetwork::find(const std::string& id) const {
  auto it = index.find(id);
  return it == index.end() ? -1 : it->second;
}

GeneNetwork GeneNetwork::from_graph(const KnowledgeGraph& g, const std::string& pp_tag,
                                    const std::vector<std::string>& include_types) {
  const RelationLayer& pp = g.layer(pp_tag);
  std::set<std::string> members;
  for (const auto& t : pp.triples) {
    members.insert(t.head);
    members.insert(t.tail);
  }
  for (const auto& type : include_types)
    for (std::int32_t v : g.nodes_of_type(type)) members.insert(g.node_id(v));

  GeneNetwork net;
  net.ids.assign(members.begin(), members.end());  // node-id order
  for (std::size_t i = 0; i < net.ids.size(); ++i)
    net.index.emplace(net.ids[i], static_cast<std::int32_t>(i));
  net.adj.assign(net.ids.size(), {});
  for (const auto& t : pp.triples) {
    std::int32_t a = net.index.at(t.head);
    std::int32_t b = net.index.at(t.tail);
    if (a == b) continue;
    net.adj[a].push_back(b);
    net.adj[b].push_back(a);
  }
  for (auto& nbrs : net.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return net;
}

GeneNetwork GeneNetwork::from_edges(
    const std::vector<std::string>& ids,
    const std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
  GeneNetwork net;
  net.ids = ids;
  for (std::size_t i = 0; i < ids.size(); ++i)
    net.index.emplace(ids[i], static_cast<std::int32_t>(i));
  net.adj.assign(ids.size(), {});
  for (auto [a, b] : edges) {
    if (a == b) continue;
    net.adj[a].push_back(b);
    net.adj[b].push_back(a);
  }
  for (auto& nbrs : net.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return net;
}

std::vector<RankedGene> neighborhood_rank(const GeneNetwork& net, const SeedSet& seed,
                                          std::size_t limit) {
  if (net.size() == 0) throw Error("neighborhood_rank: empty network");
  if (limit < 1) throw Error("neighborhood_rank: limit must be >= 1");
  auto seeds = canonical_seeds(net, seed);

  std::vector<char> in_cluster(net.size(), 0);
  std::vector<std::int32_t> cluster_links(net.size(), 0);
  for (std::int32_t s : seeds) {
    if (in_cluster[s]) continue;
    in_cluster[s] = 1;
    for (std::int32_t nb : net.adj[s]) ++cluster_links[nb];
  }

  std::vector<RankedGene> out;
  while (out.size() < limit) {
    std::int32_t best = -1;
    double best_score = 0.0;
    for (std::int32_t v = 0; v < static_cast<std::int32_t>(net.size()); ++v) {
      if (in_cluster[v]) continue;
      std::size_t deg = net.adj[v].size();
      double score = deg == 0 ? 0.0 : static_cast<double>(cluster_links[v]) /
                                          static_cast<double>(deg);
      if (score > best_score) {  // ties keep the smaller node-id
        best_score = score;
        best = v;
      }
    }
    if (best < 0) break;  // all remaining scores are 0
    out.push_back({best, best_score});
    in_cluster[best] = 1;
    for (std::int32_t nb : net.adj[best]) ++cluster_links[nb];
  }
  return out;
}

double diamond_pvalue(std::int64_t N, std::int64_t s0, std::int64_t k, std::int64_t ks) {
  if (N < 1 || s0 < 0 || s0 >= N || k < 0 || k > N)
    throw Error("diamond_pvalue: parameters out of domain");
  if (ks < 0 || ks > std::min(k, s0))
    throw Error("diamond_pvalue: ks out of domain");
  // Support of X is [max(0, k-(N-s0)), min(k, s0)].
  std::int64_t lo = std::max<std::int64_t>(0, k - (N - s0));
  std::int64_t hi = std::min(k, s0);
  if (ks <= lo) return 1.0;
  double denom = log_choose(N, k);
  double p = 0;
  for (std::int64_t x = ks; x <= hi; ++x)
    p += std::exp(log_choose(s0, x) + log_choose(N - s0, k - x) - denom);
  return std::min(p, 1.0);
}

std::vector<RankedGene> diamond_rank(const GeneNetwork& net, const SeedSet& seed,
                                     std::size_t limit) {
  if (net.size() == 0) throw Error("diamond_rank: empty network");
  if (limit < 1) throw Error("diamond_rank: limit must be >= 1");
  auto seeds = canonical_seeds(net, seed);

  const std::int64_t N = static_cast<std::int64_t>(net.size());
  std::vector<char> in_cluster(net.size(), 0);
  std::vector<std::int32_t> cluster_links(net.size(), 0);
  std::int64_t s0 = 0;
  for (std::int32_t s : seeds) {
    if (in_cluster[s]) continue;
    in_cluster[s] = 1;
    ++s0;
    for (std::int32_t nb : net.adj[s]) ++cluster_links[nb];
  }

  std::vector<RankedGene> out;
  while (out.size() < limit && s0 < N) {
    std::int32_t best = -1;
    double best_p = 2.0;
    std::int32_t best_ks = -1;
    for (std::int32_t v = 0; v < static_cast<std::int32_t>(net.size()); ++v) {
      if (in_cluster[v] || cluster_links[v] < 1) continue;
      std::int64_t k = static_cast<std::int64_t>(net.adj[v].size());
      std::int64_t ks = cluster_links[v];
      double p = diamond_pvalue(N, s0, k, ks);
      if (p < best_p || (p == best_p && ks > best_ks)) {
        best_p = p;
        best = v;
        best_ks = static_cast<std::int32_t>(ks);
      }
    }
    if (best < 0) break;  // nothing touches the cluster
    out.push_back({best, best_p});
    in_cluster[best] = 1;
    ++s0;
    for (std::int32_t nb : net.adj[best]) ++cluster_links[nb];
  }
  return out;
}

std::vector<double> random_walk_restart(const GeneNetwork& net, const SeedSet& seed,
                                        double restart, double tol) {
  if (net.size() == 0) throw Error("random_walk_restart: empty network");
  if (!(restart > 0 && restart < 1))
    throw Error("random_walk_restart: restart must be in (0, 1)");
  if (!(tol > 0)) throw Error("random_walk_restart: tol must be > 0");
  auto seeds = canonical_seeds(net, seed);

  const std::size_t n = net.size();
  std::vector<double> u(n, 0.0);
  for (std::int32_t s : seeds) u[s] = 1.0 / static_cast<double>(seeds.size());

  std::vector<double> pi = u, next(n, 0.0);
  for (int it = 0; it < kRwrIterationCap; ++it) {
    double dangling = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (net.adj[j].empty()) dangling += pi[j];
    for (std::size_t i = 0; i < n; ++i) {
      double flow = 0;
      for (std::int32_t j : net.adj[i])
        flow += pi[j] / static_cast<double>(net.adj[j].size());
      next[i] = restart * u[i] + (1.0 - restart) * (flow + dangling * u[i]);
    }
    double delta = 0;
    for (std::size_t i = 0; i < n; ++i) delta += std::fabs(next[i] - pi[i]);
    pi.swap(next);
    if (delta < tol) return pi;
  }
  throw Error("random_walk_restart: no convergence within iteration cap");
}

std::vector<RankedGene> rwr_rank(const GeneNetwork& net, const SeedSet& seed,
                                 double restart, double tol) {
  std::vector<double> pi = random_walk_restart(net, seed, restart, tol);
  auto seeds = canonical_seeds(net, seed);
  std::vector<char> is_seed(net.size(), 0);
  for (std::int32_t s : seeds) is_seed[s] = 1;

  std::vector<RankedGene> out;
  for (std::int32_t v = 0; v < static_cast<std::int32_t>(net.size()); ++v)
    if (!is_seed[v] && pi[v] > 0) out.push_back({v, pi[v]});
  std::stable_sort(out.begin(), out.end(), [](const RankedGene& a, const RankedGene& b) {
    return a.score > b.score;  // stable keeps node-id order for ties
  });
  return out;
}

void write_ranked_tsv(const GeneNetwork& net, const std::vector<RankedGene>& ranked,
                      const std::string& score_name, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_ranked_tsv: cannot write " + path);
  out << "# rank\tgene\t" << score_name << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g", ranked[i].score);
    out << (i + 1) << '\t' << net.ids[ranked[i].node] << '\t' << buf << '\n';
  }
}

}  // namespace kglp

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "kglp/graph.hpp"

namespace kglp {

// Undirected network over gene/protein nodes, projected from a symmetric
// protein-protein layer. No self-loops; adjacency sorted per node.
struct GeneNetwork {
  std::vector<std::string> ids;  // network index -> node id
  std::unordered_map<std::string, std::int32_t> index;
  std::vector<std::vector<std::int32_t>> adj;

  std::size_t size() const { return ids.size(); }
  std::int32_t find(const std::string& id) const;

  // Nodes touched by the layer tagged `pp_tag` plus, when `include_types`
  // is nonempty, all graph nodes of those types (so isolated genes stay
  // candidates).
  static GeneNetwork from_graph(const KnowledgeGraph& g, const std::string& pp_tag,
                                const std::vector<std::string>& include_types = {});
  static GeneNetwork from_edges(const std::vector<std::string>& ids,
                                const std::vector<std::pair<std::int32_t, std::int32_t>>& edges);
};

// A disease's known (train-split) genes, as network indexes.
struct SeedSet {
  std::string disease;
  std::vector<std::int32_t> seeds;
};

struct RankedGene {
  std::int32_t node;
  double score;  // neighborhood fraction, p-value, or visit frequency
};

// Direct neighborhood scoring: grow the cluster by the gene with the largest
// fraction of neighbors inside it; degree-0 genes score 0 and genes scoring
// 0 are never emitted. Ties break by node-id order.
std::vector<RankedGene> neighborhood_rank(const GeneNetwork& net, const SeedSet& seed,
                                          std::size_t limit);

// Hypergeometric tail P(X >= ks) for X ~ Hypergeom(N, s0, k): connectivity
// significance of a degree-k node with ks links into a cluster of size s0.
double diamond_pvalue(std::int64_t N, std::int64_t s0, std::int64_t k, std::int64_t ks);

// DIAMOnD: repeatedly add the candidate with the smallest connectivity
// significance; ties break by higher ks, then node-id order. Only genes with
// at least one link to the current cluster are considered.
std::vector<RankedGene> diamond_rank(const GeneNetwork& net, const SeedSet& seed,
                                     std::size_t limit);

// Random walk with restart: fixed point of
//   pi = (1-restart) W pi + restart u
// with W column-normalized adjacency (degree-0 columns replaced by the
// restart distribution) and u uniform over the seeds. Iterates until the L1
// change drops below tol; throws after 10^4 iterations.
std::vector<double> random_walk_restart(const GeneNetwork& net, const SeedSet& seed,
                                        double restart, double tol);

// RWR ranking: non-seed genes by descending visit frequency, ties by node-id
// order.
std::vector<RankedGene> rwr_rank(const GeneNetwork& net, const SeedSet& seed,
                                 double restart, double tol);

void write_ranked_tsv(const GeneNetwork& net, const std::vector<RankedGene>& ranked,
                      const std::string& score_name, const std::string& path);

}  // namespace kglp

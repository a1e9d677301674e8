#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kglp/graph.hpp"

namespace kglp {

// Train/valid/test partition of the disease-gene layer. `train` additionally
// carries the graph's non-DG layers when they were attached at split time;
// valid and test hold disease-gene triples only.
struct SplitBundle {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::size_t train_dg = 0;  // disease-gene triples inside `train`
};

// Splits the layer tagged `dg_tag` into train/valid/test by `ratios`
// (floor sizes, remainder to train) under the constraint that every node
// incident to the layer keeps at least one train triple. A random covering
// edge set is forced into train first (greedy over shuffled edges), the rest
// of the train quota is filled from the remaining shuffled edges. When
// `attach_non_dg` is set, all other layers of `g` go wholly into train.
// Deterministic for a given (graph, ratios, seed).
SplitBundle split_disease_gene(const KnowledgeGraph& g, const std::string& dg_tag,
                               std::array<double, 3> ratios, std::uint64_t seed,
                               bool attach_non_dg = true);

// Removes every train triple whose head or tail is in `genes`. Ids absent
// from the graph are ignored; ids present with a type other than `gene_type`
// are rejected.
std::vector<Triple> excise_gene_leakage(const KnowledgeGraph& g,
                                        const std::vector<Triple>& train,
                                        const std::vector<std::string>& genes,
                                        const std::string& gene_type = "gene");

// Split manifest: train.tsv / valid.tsv / test.tsv (head, relation, tail)
// plus split.meta (key=value lines).
void write_split(const SplitBundle& bundle, const std::string& dir);
SplitBundle read_split(const std::string& dir);

}  // namespace kglp

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kglp {

// One directed typed edge <head, relation, tail>.
struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const;
};

// Per-layer ingestion counters. `parsed` counts valid data rows, `duplicates`
// rows whose triple was already present, `malformed` rows skipped.
struct IngestStats {
  std::size_t lines = 0;
  std::size_t comments = 0;
  std::size_t parsed = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
};

// All edges of one relation type sourced from one dataset. Triples are
// deduplicated; for symmetric layers both directions are materialized.
struct RelationLayer {
  std::string tag;
  std::string relation;
  bool symmetric = false;
  std::vector<Triple> triples;
  IngestStats stats;
};

// Reads an edge TSV (head<TAB>tail, '#' comments skipped, extra columns
// ignored). Malformed rows are skipped and counted. Throws on unreadable
// files and on files with zero valid rows.
RelationLayer load_layer(const std::string& path, std::string tag,
                         std::string relation, bool symmetric);

// Builds a layer from in-memory pairs with the same dedup/symmetry rules.
RelationLayer make_layer(std::string tag, std::string relation, bool symmetric,
                         const std::vector<std::pair<std::string, std::string>>& edges);

// Reads a node-type TSV (node_id<TAB>type_tag). Strict: malformed rows and
// conflicting type assignments are errors.
std::unordered_map<std::string, std::string> load_node_types(const std::string& path);

struct IndexedTriple {
  std::int32_t head;
  std::int32_t rel;
  std::int32_t tail;

  auto operator<=>(const IndexedTriple&) const = default;
};

// Immutable typed heterogeneous graph: node registry with dense indexes,
// ordered relation layers, per-relation adjacency, and a membership index
// over all stored triples. Construction and augmentation produce new values.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  static KnowledgeGraph build(std::vector<RelationLayer> layers,
                              std::unordered_map<std::string, std::string> node_types);

  // Returns a new graph with `layer` appended; this graph is unchanged.
  // New nodes must be covered by the type map given at build time.
  KnowledgeGraph augment(const RelationLayer& layer) const;

  // Returns the subgraph holding exactly the selected layers (kept in this
  // graph's layer order) and the nodes they touch.
  KnowledgeGraph project(const std::vector<std::string>& tags) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t triple_count() const { return triples_.size(); }

  const std::vector<RelationLayer>& layers() const { return layers_; }
  bool has_layer(const std::string& tag) const;
  const RelationLayer& layer(const std::string& tag) const;

  const std::string& node_id(std::int32_t idx) const { return nodes_[idx].id; }
  const std::string& node_type(std::int32_t idx) const { return nodes_[idx].type; }
  // -1 when absent.
  std::int32_t find_node(const std::string& id) const;
  std::int32_t node_index(const std::string& id) const;  // throws on unknown

  const std::string& relation_name(std::int32_t r) const { return relations_[r]; }
  std::int32_t find_relation(const std::string& name) const;
  std::int32_t relation_index(const std::string& name) const;  // throws on unknown

  // Node indexes of one type, in index order. Empty for unknown types.
  const std::vector<std::int32_t>& nodes_of_type(const std::string& type) const;

  const std::vector<std::int32_t>& tails(std::int32_t rel, std::int32_t head) const;
  const std::vector<std::int32_t>& heads(std::int32_t rel, std::int32_t tail) const;

  bool contains(std::int32_t head, std::int32_t rel, std::int32_t tail) const;
  bool contains(const Triple& t) const;

  // All distinct triples in layer order.
  const std::vector<IndexedTriple>& all_triples() const { return triples_; }

  IndexedTriple to_indexed(const Triple& t) const;
  Triple to_triple(const IndexedTriple& t) const;

  // The full id -> type map supplied at build time (may cover ids that do
  // not occur in any layer).
  const std::unordered_map<std::string, std::string>& declared_types() const {
    return declared_types_;
  }

 private:
  struct Node {
    std::string id;
    std::string type;
  };

  std::uint64_t key(std::int32_t h, std::int32_t r, std::int32_t t) const;
  std::int32_t intern_node(const std::string& id);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::int32_t> rel_index_;
  std::vector<RelationLayer> layers_;
  std::unordered_map<std::string, std::string> declared_types_;
  std::vector<std::vector<std::vector<std::int32_t>>> out_;  // [rel][head] -> tails
  std::vector<std::vector<std::vector<std::int32_t>>> in_;   // [rel][tail] -> heads
  std::unordered_set<std::uint64_t> true_set_;
  std::unordered_map<std::string, std::vector<std::int32_t>> by_type_;
  std::vector<IndexedTriple> triples_;
};

// Membership index over a set of string triples resolved against one graph.
// Triples whose nodes or relation are absent from the graph are ignored.
class TripleSet {
 public:
  TripleSet() = default;
  TripleSet(const KnowledgeGraph& g, const std::vector<Triple>& triples);

  bool contains(std::int32_t head, std::int32_t rel, std::int32_t tail) const;
  std::size_t size() const { return set_.size(); }

 private:
  std::uint64_t nodes_ = 0;
  std::unordered_set<std::uint64_t> set_;
};

}  // namespace kglp

#include "kglp/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "kglp/error.hpp"

namespace kglp {

namespace {

// Splits a line on tabs. Trailing '\r' is stripped so CRLF files work.
std::vector<std::string> split_tsv(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool is_comment_or_blank(const std::string& line) {
  if (line.empty() || line[0] == '#') return true;
  return line.size() == 1 && line[0] == '\r';
}

}  // namespace

std::size_t TripleHash::operator()(const Triple& t) const {
  std::hash<std::string> h;
  std::size_t v = h(t.head);
  v = v * 1000003u ^ h(t.relation);
  v = v * 1000003u ^ h(t.tail);
  return v;
}

static void insert_edge(RelationLayer& layer,
                        std::unordered_set<Triple, TripleHash>& seen,
                        const std::string& head, const std::string& tail,
                        bool* was_duplicate) {
  Triple fwd{head, layer.relation, tail};
  bool inserted = seen.insert(fwd).second;
  if (inserted) layer.triples.push_back(fwd);
  if (was_duplicate) *was_duplicate = !inserted;
  if (layer.symmetric && head != tail) {
    Triple rev{tail, layer.relation, head};
    if (seen.insert(rev).second) layer.triples.push_back(rev);
  }
}

RelationLayer load_layer(const std::string& path, std::string tag,
                         std::string relation, bool symmetric) {
  std::ifstream in(path);
  if (!in) throw Error("load_layer: cannot read " + path);

  RelationLayer layer;
  layer.tag = std::move(tag);
  layer.relation = std::move(relation);
  layer.symmetric = symmetric;

  std::unordered_set<Triple, TripleHash> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++layer.stats.lines;
    if (is_comment_or_blank(line)) {
      ++layer.stats.comments;
      continue;
    }
    auto fields = split_tsv(line);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      ++layer.stats.malformed;
      continue;
    }
    ++layer.stats.parsed;
    bool dup = false;
    insert_edge(layer, seen, fields[0], fields[1], &dup);
    if (dup) ++layer.stats.duplicates;
  }
  if (layer.stats.parsed == 0)
    throw Error("load_layer: no valid rows in " + path);
  return layer;
}

RelationLayer make_layer(std::string tag, std::string relation, bool symmetric,
                         const std::vector<std::pair<std::string, std::string>>& edges) {
  RelationLayer layer;
  layer.tag = std::move(tag);
  layer.relation = std::move(relation);
  layer.symmetric = symmetric;
  std::unordered_set<Triple, TripleHash> seen;
  for (const auto& [h, t] : edges) {
    bool dup = false;
    insert_edge(layer, seen, h, t, &dup);
    ++layer.stats.parsed;
    if (dup) ++layer.stats.duplicates;
  }
  return layer;
}

std::unordered_map<std::string, std::string> load_node_types(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_node_types: cannot read " + path);
  std::unordered_map<std::string, std::string> types;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    auto fields = split_tsv(line);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
      throw Error("load_node_types: malformed row at " + path + ":" +
                  std::to_string(lineno));
    auto [it, inserted] = types.emplace(fields[0], fields[1]);
    if (!inserted && it->second != fields[1])
      throw Error("load_node_types: conflicting types for '" + fields[0] +
                  "': " + it->second + " vs " + fields[1]);
  }
  if (types.empty()) throw Error("load_node_types: no valid rows in " + path);
  return types;
}

std::uint64_t KnowledgeGraph::key(std::int32_t h, std::int32_t r, std::int32_t t) const {
  std::uint64_t n = nodes_.size();
  return (static_cast<std::uint64_t>(r) * n + static_cast<std::uint64_t>(h)) * n +
         static_cast<std::uint64_t>(t);
}

std::int32_t KnowledgeGraph::intern_node(const std::string& id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  auto ty = declared_types_.find(id);
  if (ty == declared_types_.end())
    throw Error("build_graph: node '" + id + "' has no declared type");
  std::int32_t idx = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({id, ty->second});
  index_.emplace(id, idx);
  by_type_[ty->second].push_back(idx);
  return idx;
}

KnowledgeGraph KnowledgeGraph::build(std::vector<RelationLayer> layers,
                                     std::unordered_map<std::string, std::string> node_types) {
  KnowledgeGraph g;
  g.declared_types_ = std::move(node_types);
  g.layers_ = std::move(layers);

  std::set<std::string> tags;
  for (const auto& layer : g.layers_) {
    if (!tags.insert(layer.tag).second)
      throw Error("build_graph: duplicate layer tag '" + layer.tag + "'");
    if (g.rel_index_.find(layer.relation) == g.rel_index_.end()) {
      g.rel_index_.emplace(layer.relation, static_cast<std::int32_t>(g.relations_.size()));
      g.relations_.push_back(layer.relation);
    }
  }

  // First pass assigns indexes in first-appearance order.
  for (const auto& layer : g.layers_) {
    for (const auto& t : layer.triples) {
      g.intern_node(t.head);
      g.intern_node(t.tail);
    }
  }

  g.out_.assign(g.relations_.size(), std::vector<std::vector<std::int32_t>>(g.nodes_.size()));
  g.in_.assign(g.relations_.size(), std::vector<std::vector<std::int32_t>>(g.nodes_.size()));

  for (const auto& layer : g.layers_) {
    std::int32_t r = g.rel_index_.at(layer.relation);
    for (const auto& t : layer.triples) {
      std::int32_t h = g.index_.at(t.head);
      std::int32_t tl = g.index_.at(t.tail);
      if (!g.true_set_.insert(g.key(h, r, tl)).second) continue;  // union across layers
      g.triples_.push_back({h, r, tl});
      g.out_[r][h].push_back(tl);
      g.in_[r][tl].push_back(h);
    }
  }
  for (auto& per_rel : g.out_)
    for (auto& v : per_rel) std::sort(v.begin(), v.end());
  for (auto& per_rel : g.in_)
    for (auto& v : per_rel) std::sort(v.begin(), v.end());
  return g;
}

KnowledgeGraph KnowledgeGraph::augment(const RelationLayer& layer) const {
  if (has_layer(layer.tag))
    throw Error("augment: duplicate layer tag '" + layer.tag + "'");
  std::vector<RelationLayer> layers = layers_;
  layers.push_back(layer);
  return build(std::move(layers), declared_types_);
}

KnowledgeGraph KnowledgeGraph::project(const std::vector<std::string>& tags) const {
  std::set<std::string> want(tags.begin(), tags.end());
  for (const auto& tag : tags)
    if (!has_layer(tag)) throw Error("project: unknown layer tag '" + tag + "'");
  std::vector<RelationLayer> selected;
  for (const auto& layer : layers_)
    if (want.count(layer.tag)) selected.push_back(layer);
  return build(std::move(selected), declared_types_);
}

bool KnowledgeGraph::has_layer(const std::string& tag) const {
  for (const auto& layer : layers_)
    if (layer.tag == tag) return true;
  return false;
}

const RelationLayer& KnowledgeGraph::layer(const std::string& tag) const {
  for (const auto& layer : layers_)
    if (layer.tag == tag) return layer;
  throw Error("unknown layer tag '" + tag + "'");
}

std::int32_t KnowledgeGraph::find_node(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

std::int32_t KnowledgeGraph::node_index(const std::string& id) const {
  std::int32_t idx = find_node(id);
  if (idx < 0) throw Error("unknown node '" + id + "'");
  return idx;
}

std::int32_t KnowledgeGraph::find_relation(const std::string& name) const {
  auto it = rel_index_.find(name);
  return it == rel_index_.end() ? -1 : it->second;
}

std::int32_t KnowledgeGraph::relation_index(const std::string& name) const {
  std::int32_t idx = find_relation(name);
  if (idx < 0) throw Error("unknown relation '" + name + "'");
  return idx;
}

const std::vector<std::int32_t>& KnowledgeGraph::nodes_of_type(const std::string& type) const {
  static const std::vector<std::int32_t> kEmpty;
  auto it = by_type_.find(type);
  return it == by_type_.end() ? kEmpty : it->second;
}

const std::vector<std::int32_t>& KnowledgeGraph::tails(std::int32_t rel, std::int32_t head) const {
  return out_[rel][head];
}

const std::vector<std::int32_t>& KnowledgeGraph::heads(std::int32_t rel, std::int32_t tail) const {
  return in_[rel][tail];
}

bool KnowledgeGraph::contains(std::int32_t head, std::int32_t rel, std::int32_t tail) const {
  return true_set_.count(key(head, rel, tail)) > 0;
}

bool KnowledgeGraph::contains(const Triple& t) const {
  std::int32_t h = find_node(t.head);
  std::int32_t r = find_relation(t.relation);
  std::int32_t tl = find_node(t.tail);
  if (h < 0 || r < 0 || tl < 0) return false;
  return contains(h, r, tl);
}

IndexedTriple KnowledgeGraph::to_indexed(const Triple& t) const {
  return {node_index(t.head), relation_index(t.relation), node_index(t.tail)};
}

Triple KnowledgeGraph::to_triple(const IndexedTriple& t) const {
  return {nodes_[t.head].id, relations_[t.rel], nodes_[t.tail].id};
}

TripleSet::TripleSet(const KnowledgeGraph& g, const std::vector<Triple>& triples)
    : nodes_(g.node_count()) {
  for (const auto& t : triples) {
    std::int32_t h = g.find_node(t.head);
    std::int32_t r = g.find_relation(t.relation);
    std::int32_t tl = g.find_node(t.tail);
    if (h < 0 || r < 0 || tl < 0) continue;
    set_.insert((static_cast<std::uint64_t>(r) * nodes_ + h) * nodes_ + tl);
  }
}

bool TripleSet::contains(std::int32_t head, std::int32_t rel, std::int32_t tail) const {
  return set_.count((static_cast<std::uint64_t>(rel) * nodes_ + head) * nodes_ + tail) > 0;
}

}  // namespace kglp

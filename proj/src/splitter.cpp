#include "kglp/splitter.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "kglp/error.hpp"
#include "kglp/rng.hpp"

namespace kglp {

namespace {

void check_ratios(const std::array<double, 3>& r) {
  for (double x : r)
    if (!(x > 0.0)) throw Error("split: ratios must be positive");
  if (std::fabs(r[0] + r[1] + r[2] - 1.0) > 1e-9)
    throw Error("split: ratios must sum to 1");
}

void write_triples(const std::string& path, const std::vector<Triple>& ts) {
  std::ofstream out(path);
  if (!out) throw Error("write_split: cannot write " + path);
  for (const auto& t : ts) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

std::vector<Triple> read_triples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_split: cannot read " + path);
  std::vector<Triple> ts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.back() == '\r') line.pop_back();
    std::size_t a = line.find('\t');
    std::size_t b = line.find('\t', a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw Error("read_split: malformed row in " + path);
    ts.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
  }
  return ts;
}

}  // namespace

SplitBundle split_disease_gene(const KnowledgeGraph& g, const std::string& dg_tag,
                               std::array<double, 3> ratios, std::uint64_t seed,
                               bool attach_non_dg) {
  check_ratios(ratios);
  const RelationLayer& dg = g.layer(dg_tag);
  const std::size_t n = dg.triples.size();
  if (n == 0) throw Error("split: disease-gene layer is empty");

  const std::size_t n_valid = static_cast<std::size_t>(ratios[1] * static_cast<double>(n));
  const std::size_t n_test = static_cast<std::size_t>(ratios[2] * static_cast<double>(n));
  const std::size_t n_train = n - n_valid - n_test;  // floor sizes, remainder to train

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(seed).stream("split");
  rng.shuffle(order);

  // Greedy covering pass: an edge is forced into train iff it covers a node
  // not yet covered. Every DG-incident node has at least one edge, so one
  // pass covers everything coverable.
  std::unordered_set<std::string> covered;
  std::vector<std::size_t> forced, rest;
  for (std::size_t i : order) {
    const Triple& t = dg.triples[i];
    bool head_new = !covered.count(t.head);
    bool tail_new = !covered.count(t.tail);
    if (head_new || tail_new) {
      covered.insert(t.head);
      covered.insert(t.tail);
      forced.push_back(i);
    } else {
      rest.push_back(i);
    }
  }
  if (forced.size() > n_train)
    throw Error("split: coverage constraint unsatisfiable: " +
                std::to_string(forced.size()) + " covering edges exceed train quota " +
                std::to_string(n_train));

  SplitBundle bundle;
  bundle.seed = seed;
  bundle.ratios = ratios;

  std::vector<Triple> train_dg;
  for (std::size_t i : forced) train_dg.push_back(dg.triples[i]);
  std::size_t fill = n_train - forced.size();
  for (std::size_t j = 0; j < fill; ++j) train_dg.push_back(dg.triples[rest[j]]);
  for (std::size_t j = fill; j < fill + n_valid; ++j)
    bundle.valid.push_back(dg.triples[rest[j]]);
  for (std::size_t j = fill + n_valid; j < rest.size(); ++j)
    bundle.test.push_back(dg.triples[rest[j]]);

  if (attach_non_dg) {
    for (const auto& layer : g.layers()) {
      if (layer.tag == dg_tag) continue;
      bundle.train.insert(bundle.train.end(), layer.triples.begin(), layer.triples.end());
    }
  }
  bundle.train_dg = train_dg.size();
  bundle.train.insert(bundle.train.end(), train_dg.begin(), train_dg.end());
  return bundle;
}

std::vector<Triple> excise_gene_leakage(const KnowledgeGraph& g,
                                        const std::vector<Triple>& train,
                                        const std::vector<std::string>& genes,
                                        const std::string& gene_type) {
  std::unordered_set<std::string> excised;
  for (const auto& id : genes) {
    std::int32_t idx = g.find_node(id);
    if (idx < 0) continue;  // not in the graph, nothing to excise
    if (g.node_type(idx) != gene_type)
      throw Error("excise_gene_leakage: node '" + id + "' has type " +
                  g.node_type(idx) + ", expected " + gene_type);
    excised.insert(id);
  }
  std::vector<Triple> kept;
  kept.reserve(train.size());
  for (const auto& t : train)
    if (!excised.count(t.head) && !excised.count(t.tail)) kept.push_back(t);
  return kept;
}

void write_split(const SplitBundle& bundle, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_triples(dir + "/train.tsv", bundle.train);
  write_triples(dir + "/valid.tsv", bundle.valid);
  write_triples(dir + "/test.tsv", bundle.test);
  std::ofstream meta(dir + "/split.meta");
  if (!meta) throw Error("write_split: cannot write " + dir + "/split.meta");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g", bundle.ratios[0],
                bundle.ratios[1], bundle.ratios[2]);
  meta << "seed=" << bundle.seed << '\n'
       << "ratios=" << buf << '\n'
       << "train=" << bundle.train.size() << '\n'
       << "train_dg=" << bundle.train_dg << '\n'
       << "valid=" << bundle.valid.size() << '\n'
       << "test=" << bundle.test.size() << '\n';
}

SplitBundle read_split(const std::string& dir) {
  SplitBundle bundle;
  bundle.train = read_triples(dir + "/train.tsv");
  bundle.valid = read_triples(dir + "/valid.tsv");
  bundle.test = read_triples(dir + "/test.tsv");
  std::ifstream meta(dir + "/split.meta");
  if (!meta) throw Error("read_split: cannot read " + dir + "/split.meta");
  std::string line;
  while (std::getline(meta, line)) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "seed") bundle.seed = std::stoull(v);
    else if (k == "train_dg") bundle.train_dg = std::stoull(v);
    else if (k == "ratios") {
      std::sscanf(v.c_str(), "%lf,%lf,%lf", &bundle.ratios[0], &bundle.ratios[1],
                  &bundle.ratios[2]);
    }
  }
  return bundle;
}

}  // namespace kglp

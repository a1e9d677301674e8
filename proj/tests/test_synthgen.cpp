#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "kglp/error.hpp"
#include "kglp/synthgen.hpp"
#include "test_util.hpp"

using namespace kglp;

namespace {

const RelationLayer& layer_of(const SynthResult& r, const std::string& tag) {
  for (const auto& l : r.layers)
    if (l.tag == tag) return l;
  throw std::runtime_error("missing layer " + tag);
}

std::map<std::string, std::set<std::string>> modules_of(const SynthResult& r) {
  std::map<std::string, std::set<std::string>> m;
  for (const auto& row : r.truth) m[row.disease].insert(row.gene);
  return m;
}

}  // namespace

TEST_CASE("reveal fraction 1.0 links every module gene") {
  SynthConfig cfg;
  cfg.reveal = 1.0;
  cfg.seed = 3;
  SynthResult r = generate(cfg);
  std::set<std::pair<std::string, std::string>> dg;
  for (const auto& t : layer_of(r, "DG").triples) dg.emplace(t.head, t.tail);
  for (const auto& row : r.truth) {
    CHECK(row.revealed);
    CHECK(dg.count({row.disease, row.gene}) == 1);
  }
}

TEST_CASE("truth rows agree with the disease-gene layer") {
  SynthConfig cfg;
  cfg.seed = 4;
  SynthResult r = generate(cfg);
  std::set<std::pair<std::string, std::string>> dg;
  for (const auto& t : layer_of(r, "DG").triples) dg.emplace(t.head, t.tail);
  auto modules = modules_of(r);
  std::size_t revealed = 0;
  for (const auto& row : r.truth) {
    if (row.revealed) {
      ++revealed;
      CHECK(dg.count({row.disease, row.gene}) == 1);
    } else {
      CHECK(dg.count({row.disease, row.gene}) == 0);
    }
  }
  CHECK(revealed < r.truth.size());  // some members held out at reveal 0.6
  CHECK(revealed < dg.size());       // pleiotropic links exist beyond the modules
  // every non-module edge targets either an all-disease hub outside the
  // modules or a revealed member of another module (cross association)
  std::set<std::string> module_genes;
  for (const auto& [d, genes] : modules) module_genes.insert(genes.begin(), genes.end());
  std::set<std::pair<std::string, std::string>> revealed_set;
  for (const auto& row : r.truth)
    if (row.revealed) revealed_set.emplace(row.disease, row.gene);
  std::map<std::string, int> hub_degree;
  int cross_edges = 0;
  for (const auto& [d, g] : dg) {
    if (modules.at(d).count(g)) continue;
    if (module_genes.count(g)) {
      ++cross_edges;
      bool revealed_elsewhere = false;
      for (const auto& [od, genes] : modules)
        if (od != d && genes.count(g) && revealed_set.count({od, g}))
          revealed_elsewhere = true;
      CHECK(revealed_elsewhere);
    } else {
      ++hub_degree[g];
    }
  }
  CHECK(!hub_degree.empty());
  CHECK(cross_edges > 0);
  for (const auto& [g, deg] : hub_degree) CHECK(deg == 5);
}

TEST_CASE("intra-module edge count matches the binomial oracle on defaults") {
  SynthConfig cfg;  // defaults: 5/300/20, p_in 0.3, p_out 0.01, reveal 0.6
  SynthResult r = generate(cfg);
  auto modules = modules_of(r);

  std::set<std::pair<std::string, std::string>> in_module_pairs;
  for (const auto& [d, genes] : modules) {
    std::vector<std::string> v(genes.begin(), genes.end());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        in_module_pairs.emplace(std::min(v[i], v[j]), std::max(v[i], v[j]));
  }
  std::size_t realized = 0;
  std::set<std::pair<std::string, std::string>> pp;
  for (const auto& t : layer_of(r, "PP").triples)
    pp.emplace(std::min(t.head, t.tail), std::max(t.head, t.tail));
  for (const auto& pair : in_module_pairs)
    if (pp.count(pair)) ++realized;

  // X ~ Binomial(|pairs|, p_in) exactly
  double n = static_cast<double>(in_module_pairs.size());
  double mean = n * cfg.p_in;
  double sigma = std::sqrt(n * cfg.p_in * (1 - cfg.p_in));
  CHECK(std::fabs(static_cast<double>(realized) - mean) <= 3 * sigma);

  // implied intra-module degree is near p_in * (module_size - 1)
  double mean_degree = 2.0 * realized / (cfg.diseases * cfg.module_size);
  CHECK(mean_degree > 0.7 * cfg.p_in * (cfg.module_size - 1));
}

TEST_CASE("p_in == p_out removes the module signal") {
  SynthConfig cfg;
  cfg.p_in = 0.05;
  cfg.p_out = 0.05;
  cfg.seed = 5;
  SynthResult r = generate(cfg);
  auto modules = modules_of(r);
  std::set<std::pair<std::string, std::string>> in_module_pairs;
  for (const auto& [d, genes] : modules) {
    std::vector<std::string> v(genes.begin(), genes.end());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        in_module_pairs.emplace(std::min(v[i], v[j]), std::max(v[i], v[j]));
  }
  std::set<std::pair<std::string, std::string>> pp;
  for (const auto& t : layer_of(r, "PP").triples)
    pp.emplace(std::min(t.head, t.tail), std::max(t.head, t.tail));

  double total_pairs = cfg.genes * (cfg.genes - 1) / 2.0;
  std::size_t in_hits = 0;
  for (const auto& pair : in_module_pairs)
    if (pp.count(pair)) ++in_hits;
  double out_pairs = total_pairs - static_cast<double>(in_module_pairs.size());
  double out_hits = static_cast<double>(pp.size() - in_hits);

  // both rates within 3 sigma of the shared p
  double p = cfg.p_in;
  double n_in = static_cast<double>(in_module_pairs.size());
  CHECK(std::fabs(in_hits - n_in * p) <= 3 * std::sqrt(n_in * p * (1 - p)));
  CHECK(std::fabs(out_hits - out_pairs * p) <= 3 * std::sqrt(out_pairs * p * (1 - p)));
}

TEST_CASE("held-out genes carry recoverable signal on the default config") {
  SynthConfig cfg;
  SynthResult r = generate(cfg);
  CHECK(r.signal_ratio > 2.0);
}

TEST_CASE("noise layer has the requested size and shape") {
  SynthConfig cfg;
  cfg.seed = 6;
  SynthResult r = generate(cfg);
  const auto& noise = layer_of(r, "NOISE").triples;
  CHECK(noise.size() == static_cast<std::size_t>(cfg.noise_edges));
  std::set<std::pair<std::string, std::string>> distinct;
  for (const auto& t : noise) {
    CHECK(t.head[0] == 'p');
    CHECK(t.tail[0] == 'g');
    distinct.emplace(t.head, t.tail);
  }
  CHECK(distinct.size() == noise.size());

  SynthConfig no_noise = cfg;
  no_noise.noise_edges = 0;
  CHECK(generate(no_noise).layers.size() == 2);
}

TEST_CASE("same seed emits byte-identical TSVs") {
  SynthConfig cfg;
  cfg.genes = 80;
  cfg.diseases = 3;
  cfg.module_size = 10;
  cfg.pathways = 6;
  cfg.noise_edges = 40;
  cfg.seed = 7;
  testutil::TempDir tmp;
  write_synth(generate(cfg), cfg, tmp.file("a"));
  write_synth(generate(cfg), cfg, tmp.file("b"));
  for (const char* name :
       {"dg.tsv", "ppi.tsv", "noise.tsv", "node_types.tsv", "truth.tsv"}) {
    CAPTURE(name);
    std::string a = testutil::read_file(tmp.file("a") + "/" + name);
    CHECK(a == testutil::read_file(tmp.file("b") + "/" + name));
    CHECK(!a.empty());
  }
  // the config stub differs only in the embedded output paths
  auto normalize = [&](const std::string& s, const std::string& dir) {
    std::string out = s;
    std::size_t pos;
    while ((pos = out.find(dir)) != std::string::npos) out.replace(pos, dir.size(), "@");
    return out;
  };
  CHECK(normalize(testutil::read_file(tmp.file("a") + "/synth.conf"), tmp.file("a")) ==
        normalize(testutil::read_file(tmp.file("b") + "/synth.conf"), tmp.file("b")));

  SynthConfig other = cfg;
  other.seed = 8;
  testutil::TempDir tmp2;
  write_synth(generate(other), other, tmp2.file("c"));
  CHECK(testutil::read_file(tmp.file("a") + "/ppi.tsv") !=
        testutil::read_file(tmp2.file("c") + "/ppi.tsv"));
}

TEST_CASE("emitted TSVs round-trip through the graph loaders") {
  SynthConfig cfg;
  cfg.genes = 80;
  cfg.diseases = 3;
  cfg.module_size = 10;
  cfg.pathways = 6;
  cfg.noise_edges = 40;
  cfg.seed = 9;
  SynthResult r = generate(cfg);
  testutil::TempDir tmp;
  write_synth(r, cfg, tmp.str());

  auto dg = load_layer(tmp.file("dg.tsv"), "DG", "disease_gene", false);
  auto pp = load_layer(tmp.file("ppi.tsv"), "PP", "ppi", true);
  auto noise = load_layer(tmp.file("noise.tsv"), "NOISE", "noise_link", false);
  auto types = load_node_types(tmp.file("node_types.tsv"));
  auto g = KnowledgeGraph::build({dg, pp, noise}, types);
  CHECK(g.triple_count() == r.graph.triple_count());
  CHECK(g.node_count() == r.graph.node_count());
}

TEST_CASE("invalid configurations are rejected") {
  SynthConfig cfg;
  cfg.module_size = cfg.genes + 1;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.genes = 30;  // 5 modules of 20 cannot fit in 30 genes
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.p_in = 0.01;
  cfg.p_out = 0.3;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.diseases = 0;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.noise_edges = cfg.pathways * cfg.genes + 1;
  CHECK_THROWS_AS(generate(cfg), Error);
}

TEST_CASE("the deterministic graph is identical across calls") {
  SynthConfig cfg;
  cfg.seed = 10;
  SynthResult a = generate(cfg);
  SynthResult b = generate(cfg);
  CHECK(a.graph.triple_count() == b.graph.triple_count());
  CHECK(a.truth.size() == b.truth.size());
  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    CHECK(a.truth[i].disease == b.truth[i].disease);
    CHECK(a.truth[i].gene == b.truth[i].gene);
    CHECK(a.truth[i].revealed == b.truth[i].revealed);
  }
}

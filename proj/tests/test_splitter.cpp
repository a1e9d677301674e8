#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "doctest.h"
#include "kglp/error.hpp"
#include "kglp/graph.hpp"
#include "kglp/rng.hpp"
#include "kglp/splitter.hpp"
#include "test_util.hpp"

using namespace kglp;
using testutil::TempDir;

namespace {

// Random bipartite disease-gene layer; genes get several disease links so
// the coverage constraint leaves room for valid/test.
KnowledgeGraph random_dg_graph(int diseases, int genes, int edges, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<std::string, std::string>> rows;
  while (static_cast<int>(rows.size()) < edges) {
    int d = static_cast<int>(rng.below(diseases));
    int g = static_cast<int>(rng.below(genes));
    if (!seen.emplace(d, g).second) continue;
    rows.emplace_back("d" + std::to_string(d), "g" + std::to_string(g));
  }
  auto layer = make_layer("DG", "disease_gene", false, rows);
  std::unordered_map<std::string, std::string> types;
  for (int d = 0; d < diseases; ++d) types.emplace("d" + std::to_string(d), "disease");
  for (int g = 0; g < genes; ++g) types.emplace("g" + std::to_string(g), "gene");
  return KnowledgeGraph::build({layer}, types);
}

std::set<Triple> dg_triples(const SplitBundle& b) {
  std::set<Triple> out;
  for (const auto& t : b.train)
    if (t.relation == "disease_gene") out.insert(t);
  return out;
}

}  // namespace

TEST_CASE("split sizes follow floor-then-remainder-to-train") {
  auto g = random_dg_graph(10, 40, 100, 5);
  auto b = split_disease_gene(g, "DG", {0.8, 0.1, 0.1}, 1);
  CHECK(b.train_dg == 80);
  CHECK(b.valid.size() == 10);
  CHECK(b.test.size() == 10);
}

TEST_CASE("star graph: the hub is forced into train") {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 1; i <= 5; ++i) rows.emplace_back("D", "g" + std::to_string(i));
  auto layer = make_layer("DG", "disease_gene", false, rows);
  std::unordered_map<std::string, std::string> types{{"D", "disease"}};
  for (int i = 1; i <= 5; ++i) types.emplace("g" + std::to_string(i), "gene");
  auto g = KnowledgeGraph::build({layer}, types);

  // every gene has a single edge, so all 5 edges are forced into train and
  // nothing is left for valid/test at these ratios
  CHECK_THROWS_AS(split_disease_gene(g, "DG", {0.2, 0.4, 0.4}, 1), Error);

  // with ratios that keep all edges in train the split succeeds and D is
  // covered by construction
  auto b = split_disease_gene(g, "DG", {0.98, 0.01, 0.01}, 1);
  CHECK(b.train_dg == 5);
  bool hub_in_train = false;
  for (const auto& t : b.train)
    if (t.head == "D") hub_in_train = true;
  CHECK(hub_in_train);
}

TEST_CASE("coverage, disjointness and partition hold over 30 seeds") {
  auto g = random_dg_graph(20, 60, 200, 77);
  const auto& dg = g.layer("DG").triples;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto b = split_disease_gene(g, "DG", {0.8, 0.1, 0.1}, seed);
    CHECK(b.train_dg == 160);
    CHECK(b.valid.size() == 20);
    CHECK(b.test.size() == 20);

    std::set<Triple> train = dg_triples(b);
    std::set<Triple> valid(b.valid.begin(), b.valid.end());
    std::set<Triple> test(b.test.begin(), b.test.end());
    CHECK(train.size() + valid.size() + test.size() == dg.size());  // partition
    for (const auto& t : valid) CHECK_FALSE(train.count(t));
    for (const auto& t : test) {
      CHECK_FALSE(train.count(t));
      CHECK_FALSE(valid.count(t));
    }

    // brute-force per-node membership scan
    std::unordered_set<std::string> covered;
    for (const auto& t : train) {
      covered.insert(t.head);
      covered.insert(t.tail);
    }
    for (const auto& t : dg) {
      CHECK(covered.count(t.head));
      CHECK(covered.count(t.tail));
    }
  }
}

TEST_CASE("same seed gives byte-identical manifests") {
  auto g = random_dg_graph(8, 30, 120, 9);
  TempDir tmp;
  auto b1 = split_disease_gene(g, "DG", {0.8, 0.1, 0.1}, 42);
  auto b2 = split_disease_gene(g, "DG", {0.8, 0.1, 0.1}, 42);
  write_split(b1, tmp.file("a"));
  write_split(b2, tmp.file("b"));
  for (const char* name : {"train.tsv", "valid.tsv", "test.tsv", "split.meta"}) {
    CHECK(testutil::read_file(tmp.file("a") + "/" + name) ==
          testutil::read_file(tmp.file("b") + "/" + name));
  }
  auto b3 = split_disease_gene(g, "DG", {0.8, 0.1, 0.1}, 43);
  CHECK(dg_triples(b3) != dg_triples(b1));  // different seed, different split
}

TEST_CASE("split manifest round-trips") {
  auto g = random_dg_graph(8, 30, 120, 9);
  TempDir tmp;
  auto b = split_disease_gene(g, "DG", {0.8, 0.1, 0.1}, 7);
  write_split(b, tmp.str());
  auto back = read_split(tmp.str());
  CHECK(back.train == b.train);
  CHECK(back.valid == b.valid);
  CHECK(back.test == b.test);
  CHECK(back.seed == b.seed);
  CHECK(back.train_dg == b.train_dg);
}

TEST_CASE("non-DG layers attach wholly to train when requested") {
  auto dg = make_layer("DG", "disease_gene", false,
                       {{"d0", "g0"}, {"d0", "g1"}, {"d1", "g0"}, {"d1", "g1"}});
  auto pp = make_layer("PP", "ppi", true, {{"g0", "g1"}});
  std::unordered_map<std::string, std::string> types{
      {"d0", "disease"}, {"d1", "disease"}, {"g0", "gene"}, {"g1", "gene"}};
  auto g = KnowledgeGraph::build({dg, pp}, types);

  auto with = split_disease_gene(g, "DG", {0.5, 0.25, 0.25}, 3, true);
  auto without = split_disease_gene(g, "DG", {0.5, 0.25, 0.25}, 3, false);
  CHECK(with.train.size() == with.train_dg + 2);  // both ppi directions
  CHECK(without.train.size() == without.train_dg);
  CHECK(with.valid == without.valid);
  CHECK(with.test == without.test);
}

TEST_CASE("split validates ratios and empty layers") {
  auto g = random_dg_graph(5, 20, 50, 2);
  CHECK_THROWS_AS(split_disease_gene(g, "DG", {0.8, 0.1, 0.2}, 1), Error);
  CHECK_THROWS_AS(split_disease_gene(g, "DG", {1.0, 0.0, 0.0}, 1), Error);
  CHECK_THROWS_AS(split_disease_gene(g, "NOPE", {0.8, 0.1, 0.1}, 1), Error);
}

TEST_CASE("excise_gene_leakage removes exactly the touching triples") {
  auto g = random_dg_graph(5, 20, 60, 13);
  auto b = split_disease_gene(g, "DG", {0.8, 0.1, 0.1}, 1);

  SUBCASE("empty excision is a no-op") {
    auto out = excise_gene_leakage(g, b.train, {});
    CHECK(out == b.train);
  }

  SUBCASE("direct membership") {
    std::string gene = b.train.front().tail;
    std::size_t touching = 0;
    for (const auto& t : b.train)
      if (t.head == gene || t.tail == gene) ++touching;
    auto out = excise_gene_leakage(g, b.train, {gene});
    CHECK(out.size() == b.train.size() - touching);
    for (const auto& t : out) {
      CHECK(t.head != gene);
      CHECK(t.tail != gene);
    }
  }

  SUBCASE("random subsets match a brute-force filter") {
    Rng rng(99);
    for (int round = 0; round < 20; ++round) {
      std::vector<std::string> genes;
      for (int i = 0; i < 20; ++i)
        if (rng.below(3) == 0) genes.push_back("g" + std::to_string(i));
      auto out = excise_gene_leakage(g, b.train, genes);
      std::unordered_set<std::string> bad(genes.begin(), genes.end());
      std::vector<Triple> expect;
      for (const auto& t : b.train)
        if (!bad.count(t.head) && !bad.count(t.tail)) expect.push_back(t);
      CHECK(out == expect);
    }
  }

  SUBCASE("non-gene ids are rejected, unknown ids ignored") {
    CHECK_THROWS_AS(excise_gene_leakage(g, b.train, {"d0"}), Error);
    auto out = excise_gene_leakage(g, b.train, {"not_in_graph"});
    CHECK(out == b.train);
  }
}

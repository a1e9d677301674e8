#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "doctest.h"
#include "kglp/baselines.hpp"
#include "kglp/error.hpp"
#include "kglp/rng.hpp"

using namespace kglp;

namespace {

GeneNetwork grid_network(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::string> ids;
  char buf[8];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "n%02d", i);
    ids.emplace_back(buf);
  }
  std::vector<std::pair<std::int32_t, std::int32_t>> e;
  for (auto [a, b] : edges) e.emplace_back(a, b);
  return GeneNetwork::from_edges(ids, e);
}

// Hand-checkable 12-node fixture; node 11 is isolated.
GeneNetwork fixture12() {
  return grid_network(12, {{0, 3}, {1, 3}, {3, 4}, {0, 4}, {4, 5}, {1, 5},
                           {2, 5}, {5, 6}, {2, 6}, {6, 7}, {7, 8}, {0, 9},
                           {1, 9}, {2, 9}, {9, 10}});
}

GeneNetwork random_network(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
  return grid_network(n, edges);
}

// Independent slow route: recompute every score from scratch each step.
std::vector<std::pair<int, double>> slow_neighborhood(const GeneNetwork& net,
                                                      std::set<int> cluster,
                                                      std::size_t limit) {
  std::vector<std::pair<int, double>> out;
  while (out.size() < limit) {
    int best = -1;
    double best_score = 0;
    for (int v = 0; v < static_cast<int>(net.size()); ++v) {
      if (cluster.count(v)) continue;
      if (net.adj[v].empty()) continue;
      int cnt = 0;
      for (int nb : net.adj[v])
        if (cluster.count(nb)) ++cnt;
      double score = static_cast<double>(cnt) / static_cast<double>(net.adj[v].size());
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    if (best < 0) break;
    out.emplace_back(best, best_score);
    cluster.insert(best);
  }
  return out;
}

namespace mp = boost::multiprecision;

mp::cpp_int binom(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  mp::cpp_int r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Exact rational tail probability; values on the tested grids convert to
// double without rounding in the numerator/denominator.
double hyper_tail_exact(std::int64_t N, std::int64_t s0, std::int64_t k, std::int64_t ks) {
  mp::cpp_int num = 0;
  for (std::int64_t x = ks; x <= std::min(k, s0); ++x)
    num += binom(s0, x) * binom(N - s0, k - x);
  return num.convert_to<double>() / binom(N, k).convert_to<double>();
}

}  // namespace

TEST_CASE("neighborhood score: 2 of 4 neighbors in the cluster gives 0.5") {
  // candidate 4 has neighbors {0,1,2,3}; seeds {0,1}; everything else is led
  // away so 4 is the unique argmax
  auto net = grid_network(6, {{4, 0}, {4, 1}, {4, 2}, {4, 3}});
  SeedSet seed{"d", {0, 1}};
  auto out = neighborhood_rank(net, seed, 1);
  REQUIRE(out.size() == 1);
  CHECK(net.ids[out[0].node] == "n04");
  CHECK(out[0].score == 0.5);
}

TEST_CASE("isolated genes are never promoted") {
  auto net = fixture12();
  SeedSet seed{"d", {0, 1, 2}};
  auto out = neighborhood_rank(net, seed, net.size());
  for (const auto& r : out) {
    CHECK(r.node != 11);
    CHECK(r.score > 0.0);
  }
}

TEST_CASE("neighborhood expansion matches the hand-computed sequence") {
  auto net = fixture12();
  SeedSet seed{"d", {0, 1, 2}};
  auto out = neighborhood_rank(net, seed, 5);
  REQUIRE(out.size() == 5);
  std::vector<int> expect_nodes{9, 10, 3, 4, 5};
  std::vector<double> expect_scores{3.0 / 4, 1.0, 2.0 / 3, 2.0 / 3, 3.0 / 4};
  for (int i = 0; i < 5; ++i) {
    CHECK(out[i].node == expect_nodes[i]);
    CHECK(out[i].score == doctest::Approx(expect_scores[i]).epsilon(1e-12));
  }
}

TEST_CASE("neighborhood matches the slow re-simulation on random networks") {
  Rng rng(5);
  for (int round = 0; round < 25; ++round) {
    auto net = random_network(18, 0.2, rng);
    SeedSet seed{"d", {0, 1, 2, 3}};
    auto got = neighborhood_rank(net, seed, 8);
    auto expect = slow_neighborhood(net, {0, 1, 2, 3}, 8);
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].node == expect[i].first);
      CHECK(got[i].score == expect[i].second);
    }
  }
}

TEST_CASE("neighborhood and diamond never emit seeds or duplicates") {
  Rng rng(6);
  auto net = random_network(20, 0.25, rng);
  SeedSet seed{"d", {2, 5, 7}};
  for (int which = 0; which < 2; ++which) {
    auto out = which == 0 ? neighborhood_rank(net, seed, net.size())
                          : diamond_rank(net, seed, net.size());
    std::set<int> seen;
    for (const auto& r : out) {
      CHECK(r.node != 2);
      CHECK(r.node != 5);
      CHECK(r.node != 7);
      CHECK(seen.insert(r.node).second);
    }
  }
}

TEST_CASE("permuting an equal seed set changes nothing") {
  Rng rng(7);
  auto net = random_network(16, 0.25, rng);
  SeedSet a{"d", {1, 4, 9}};
  SeedSet b{"d", {9, 1, 4, 1}};  // permuted, one duplicate
  auto na = neighborhood_rank(net, a, 6);
  auto nb = neighborhood_rank(net, b, 6);
  REQUIRE(na.size() == nb.size());
  for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i].node == nb[i].node);

  auto da = diamond_rank(net, a, 6);
  auto db = diamond_rank(net, b, 6);
  REQUIRE(da.size() == db.size());
  for (std::size_t i = 0; i < da.size(); ++i) CHECK(da[i].node == db[i].node);

  auto ra = rwr_rank(net, a, 0.3, 1e-10);
  auto rb = rwr_rank(net, b, 0.3, 1e-10);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].node == rb[i].node);
    CHECK(ra[i].score == rb[i].score);
  }
}

TEST_CASE("diamond_pvalue: pinned values") {
  CHECK(diamond_pvalue(10, 3, 2, 0) == 1.0);
  CHECK(diamond_pvalue(25, 6, 4, 0) == 1.0);
  // C(3,2) C(7,0) / C(10,2) = 3/45
  CHECK(diamond_pvalue(10, 3, 2, 2) == doctest::Approx(3.0 / 45.0).epsilon(1e-14));
}

TEST_CASE("diamond_pvalue matches the big-rational oracle") {
  Rng rng(8);
  for (int round = 0; round < 500; ++round) {
    std::int64_t N = 2 + static_cast<std::int64_t>(rng.below(30));
    std::int64_t s0 = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(N - 1)));
    std::int64_t k = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(N)));
    std::int64_t ks = static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(std::min(k, s0) + 1)));
    double got = diamond_pvalue(N, s0, k, ks);
    double expect = hyper_tail_exact(N, s0, k, ks);
    CHECK(std::fabs(got - expect) <= 1e-12);
  }
}

TEST_CASE("diamond_pvalue is monotone non-increasing in ks") {
  for (std::int64_t N : {5, 9, 14, 20}) {
    for (std::int64_t s0 = 1; s0 < std::min<std::int64_t>(N, 8); ++s0) {
      for (std::int64_t k = 1; k <= std::min<std::int64_t>(N, 10); ++k) {
        double prev = 2.0;
        for (std::int64_t ks = 0; ks <= std::min(k, s0); ++ks) {
          double p = diamond_pvalue(N, s0, k, ks);
          CHECK(p <= prev + 1e-15);
          CHECK(p >= 0.0);
          CHECK(p <= 1.0);
          prev = p;
        }
      }
    }
  }
}

TEST_CASE("diamond_pvalue rejects out-of-domain parameters") {
  CHECK_THROWS_AS(diamond_pvalue(10, 10, 2, 1), Error);   // s0 >= N
  CHECK_THROWS_AS(diamond_pvalue(10, 3, 11, 1), Error);   // k > N
  CHECK_THROWS_AS(diamond_pvalue(10, 3, 2, 3), Error);    // ks > min(k, s0)
  CHECK_THROWS_AS(diamond_pvalue(10, 3, 2, -1), Error);   // ks < 0
}

TEST_CASE("diamond: a candidate touching all seeds is added before one touching none") {
  // 0,1,2 seeds; 3 touches all three; 4 touches only node 5 (never the cluster)
  auto net = grid_network(6, {{3, 0}, {3, 1}, {3, 2}, {4, 5}});
  SeedSet seed{"d", {0, 1, 2}};
  auto out = diamond_rank(net, seed, net.size());
  REQUIRE(!out.empty());
  CHECK(out[0].node == 3);
  for (const auto& r : out) CHECK(r.node != 4);  // ks stays 0
}

TEST_CASE("diamond first additions match the hand-computed p-value table") {
  auto net = fixture12();
  SeedSet seed{"d", {0, 1, 2}};
  auto out = diamond_rank(net, seed, 3);
  REQUIRE(out.size() == 3);
  CHECK(out[0].node == 9);
  CHECK(out[0].score == doctest::Approx(9.0 / 495.0).epsilon(1e-12));
  CHECK(out[1].node == 3);
  CHECK(out[1].score == doctest::Approx(52.0 / 220.0).epsilon(1e-12));
  CHECK(out[2].node == 4);
  CHECK(out[2].score == doctest::Approx(80.0 / 220.0).epsilon(1e-12));
}

TEST_CASE("diamond with a generous limit stops when nothing links to the cluster") {
  // two components; the cluster can only grow inside its own component
  auto net = grid_network(7, {{0, 1}, {1, 2}, {2, 3}, {4, 5}, {5, 6}});
  SeedSet seed{"d", {0}};
  auto out = diamond_rank(net, seed, net.size());
  CHECK(out.size() == 3);  // 1, 2, 3 reachable; 4..6 never get ks >= 1
  std::set<int> emitted;
  for (const auto& r : out) emitted.insert(r.node);
  CHECK(emitted == std::set<int>{1, 2, 3});
}

TEST_CASE("diamond p-value ties break by node id") {
  // 3 and 4 are structurally identical
  auto net = grid_network(5, {{3, 0}, {3, 1}, {4, 0}, {4, 1}});
  SeedSet seed{"d", {0, 1}};
  auto out = diamond_rank(net, seed, 2);
  REQUIRE(out.size() == 2);
  CHECK(out[0].node == 3);
  CHECK(out[1].node == 4);
}

TEST_CASE("rwr: two connected nodes, both seeds, split the mass evenly") {
  auto net = grid_network(2, {{0, 1}});
  auto pi = random_walk_restart(net, {"d", {0, 1}}, 0.3, 1e-12);
  CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("rwr: restart near 1 concentrates on the seeds") {
  auto net = fixture12();
  auto pi = random_walk_restart(net, {"d", {0, 1, 2}}, 0.999, 1e-12);
  CHECK(pi[0] + pi[1] + pi[2] > 0.99);
}

TEST_CASE("rwr fixed point matches a dense linear solve") {
  Rng rng(9);
  for (int round = 0; round < 20; ++round) {
    auto net = random_network(10, 0.3, rng);
    std::vector<std::int32_t> seeds{0, static_cast<std::int32_t>(1 + rng.below(9))};
    double restart = 0.15 + rng.uniform(0, 0.7);
    auto pi = random_walk_restart(net, {"d", seeds}, restart, 1e-12);

    // dense solve of (I - (1-r) W) pi = r u with Gauss elimination
    const int n = static_cast<int>(net.size());
    std::vector<double> u(n, 0.0);
    std::set<std::int32_t> sset(seeds.begin(), seeds.end());
    for (std::int32_t s : sset) u[s] = 1.0 / static_cast<double>(sset.size());
    std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i < n; ++i) {
      A[i][i] = 1.0;
      A[i][n] = restart * u[i];
      for (int j = 0; j < n; ++j) {
        double w = 0;
        if (net.adj[j].empty()) w = u[i];
        else if (std::binary_search(net.adj[j].begin(), net.adj[j].end(), i))
          w = 1.0 / static_cast<double>(net.adj[j].size());
        A[i][j] -= (1.0 - restart) * w;
      }
    }
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r = col + 1; r < n; ++r)
        if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
      std::swap(A[col], A[piv]);
      for (int r = 0; r < n; ++r) {
        if (r == col || A[r][col] == 0.0) continue;
        double f = A[r][col] / A[col][col];
        for (int c = col; c <= n; ++c) A[r][c] -= f * A[col][c];
      }
    }
    double l1 = 0;
    for (int i = 0; i < n; ++i) l1 += std::fabs(pi[i] - A[i][n] / A[i][i]);
    CHECK(l1 <= 1e-8);
  }
}

TEST_CASE("rwr output is a probability vector") {
  Rng rng(10);
  for (int round = 0; round < 20; ++round) {
    auto net = random_network(15, 0.15, rng);  // sparse, often has isolated nodes
    auto pi = random_walk_restart(net, {"d", {0, 1}}, 0.25, 1e-11);
    double sum = 0;
    for (double x : pi) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("rwr reports non-convergence within the iteration cap") {
  // bipartite 2-cycle with a near-zero restart: the period-2 oscillation
  // decays by (1-restart) per step and cannot meet the tolerance in time
  auto net = grid_network(2, {{0, 1}});
  CHECK_THROWS_AS(random_walk_restart(net, {"d", {0}}, 1e-6, 1e-9), Error);
}

TEST_CASE("rwr parameter validation") {
  auto net = grid_network(3, {{0, 1}, {1, 2}});
  CHECK_THROWS_AS(random_walk_restart(net, {"d", {0}}, 0.0, 1e-9), Error);
  CHECK_THROWS_AS(random_walk_restart(net, {"d", {0}}, 1.0, 1e-9), Error);
  CHECK_THROWS_AS(random_walk_restart(net, {"d", {0}}, 0.3, 0.0), Error);
  CHECK_THROWS_AS(random_walk_restart(net, {"d", {}}, 0.3, 1e-9), Error);
  CHECK_THROWS_AS(random_walk_restart(net, {"d", {7}}, 0.3, 1e-9), Error);
}

TEST_CASE("rwr ranking excludes seeds and unreached genes") {
  auto net = grid_network(6, {{0, 1}, {1, 2}, {2, 3}});  // 4, 5 unreachable
  auto out = rwr_rank(net, {"d", {0}}, 0.4, 1e-12);
  std::set<int> nodes;
  for (const auto& r : out) nodes.insert(r.node);
  CHECK(nodes == std::set<int>{1, 2, 3});
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].score >= out[i].score);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "concentra/cube_core.hpp"
#include "concentra/cycle_stats.hpp"
#include "concentra/errors.hpp"
#include "concentra/rng.hpp"
#include "oracles.hpp"

using namespace concentra;
using namespace concentra::cycles;
using concentra::graph::edge_index;
using concentra::graph::sample_graph;

namespace {

std::uint64_t factorial(std::uint64_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

std::uint64_t choose(std::uint64_t n, std::uint64_t r) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

Graph path(std::size_t n) {
  Graph g(n);
  for (Vertex v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

Graph relabel(const Graph& g, const std::vector<Vertex>& perm) {
  Graph out(g.vertex_count());
  for (const auto& [u, v] : g.edge_list()) out.add_edge(perm[u], perm[v]);
  return out;
}

std::uint64_t edge_mask(const Graph& g) {
  std::uint64_t mask = 0;
  for (const auto& [u, v] : g.edge_list()) mask |= std::uint64_t{1} << edge_index(u, v);
  return mask;
}

// Z as a polynomial in the edge indicators of K_n: one monomial per k-cycle.
cube::MultilinearFunction cycle_polynomial(std::size_t n, std::size_t k) {
  cube::MultilinearFunction f(n * (n - 1) / 2);
  for (const auto& c : oracle::cycles(Graph::complete(n), k)) {
    std::uint64_t subset = 0;
    for (auto e : c.edges) subset |= std::uint64_t{1} << e;
    f.add_term(subset, 1.0);
  }
  return f;
}

}  // namespace

TEST_CASE("small examples") {
  const Graph k4 = Graph::complete(4);
  const auto s = local_variance_cycles(k4, 3);
  CHECK(s.Z == 4);
  CHECK(s.V == 24);
  CHECK(s.W == 6);
  CHECK(s.single_shared_edge_pairs == 6);
  CHECK(s.per_edge.size() == 6);
  for (const auto& e : s.per_edge) CHECK(e.cycles == 2);
  CHECK(s.per_edge_histogram() == std::vector<std::uint64_t>{0, 0, 6});

  const auto s4 = local_variance_cycles(k4, 4);
  CHECK(s4.Z == 3);
  CHECK(s4.V == 6 * 4);
  // Any two 4-cycles of K_4 share two edges.
  CHECK(s4.W == 0);

  const Graph k5 = Graph::complete(5);
  CHECK(count_cycles(k5, 3) == 10);
  CHECK(count_cycles(k5, 4) == 15);
  CHECK(count_cycles(k5, 5) == 12);

  const auto empty = local_variance_cycles(path(8), 3);
  CHECK(empty.Z == 0);
  CHECK(empty.V == 0);
  CHECK(empty.per_edge.size() == 7);
  CHECK(empty.per_edge_histogram() == std::vector<std::uint64_t>{7});
}

TEST_CASE("complete graphs match closed forms") {
  for (std::size_t n = 3; n <= 10; ++n) {
    for (std::size_t k = 3; k <= std::min<std::size_t>(n, 6); ++k) {
      const Graph kn = Graph::complete(n);
      const std::uint64_t z = choose(n, k) * factorial(k - 1) / 2;
      const std::uint64_t through_edge = factorial(n - 2) / factorial(n - k);
      const auto s = local_variance_cycles(kn, k);
      CHECK(s.Z == z);
      CHECK(count_cycles(kn, k) == z);
      for (const auto& e : s.per_edge) CHECK(e.cycles == through_edge);
      CHECK(s.V == choose(n, 2) * through_edge * through_edge);
    }
  }
}

TEST_CASE("random graphs against brute force") {
  CounterRng rng(404);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 5 + rng.below(8);
    const std::size_t k = 3 + rng.below(std::min<std::size_t>(n - 2, 4));
    const Graph g = sample_graph(n, rng.uniform(0.2, 0.8), rng.next_u64());
    const std::uint64_t z = oracle::cycle_count(g, k);
    CHECK(count_cycles(g, k) == z);
    CHECK(count_cycles_dfs(g, k, 2) == z);

    const CycleSet set = enumerate_cycles(g, k, 1 + rep % 3);
    REQUIRE(set.size() == z);
    std::set<std::vector<std::uint64_t>> from_library;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const std::vector<Vertex> c(set[i].begin(), set[i].end());
      CHECK(canonical_cycle(c) == c);
      if (i > 0) {
        CHECK(std::lexicographical_compare(set[i - 1].begin(), set[i - 1].end(), c.begin(), c.end()));
      }
      auto edges = set.edges(i);
      for (auto e : edges) {
        const auto [u, v] = graph::edge_endpoints(e);
        CHECK(g.has_edge(u, v));
      }
      std::sort(edges.begin(), edges.end());
      from_library.insert(edges);
    }
    std::set<std::vector<std::uint64_t>> from_oracle;
    for (const auto& c : oracle::cycles(g, k)) from_oracle.insert(c.edges);
    CHECK(from_library == from_oracle);

    const auto s = local_variance_cycles(g, k);
    std::uint64_t handshake = 0;
    for (const auto& e : s.per_edge) handshake += e.cycles;
    CHECK(handshake == k * s.Z);
    CHECK(s.W == oracle::shared_edge_pairs(g, k, true));
    CHECK(s.single_shared_edge_pairs == oracle::shared_edge_pairs(g, k, false));
    CHECK(count_shared_edge_pairs(g, k) == s.W);
    if (k == 3) CHECK(s.W == s.single_shared_edge_pairs);
    CHECK(local_variance_cycles(g, set).V == s.V);
  }
}

TEST_CASE("triangle fast path agrees with DFS") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = sample_graph(150, 0.1, seed);
    CHECK(count_triangles(g) == count_cycles_dfs(g, 3));
  }
}

TEST_CASE("V equals the cube local variance of the cycle polynomial") {
  CounterRng rng(8);
  for (std::size_t n = 4; n <= 8; ++n) {
    for (std::size_t k = 3; k <= std::min<std::size_t>(n, 5); ++k) {
      const auto f = cycle_polynomial(n, k);
      for (int rep = 0; rep < 6; ++rep) {
        const Graph g = sample_graph(n, rng.uniform(0.3, 0.9), rng.next_u64());
        const cube::CubePoint x(n * (n - 1) / 2, edge_mask(g));
        const auto s = local_variance_cycles(g, k);
        CHECK(static_cast<std::int64_t>(s.Z) == cube::evaluate_exact(f, x));
        CHECK(static_cast<std::int64_t>(s.V) == cube::local_variance_exact(f, x));
      }
    }
  }
}

TEST_CASE("monotone under edge addition and invariant under relabeling") {
  CounterRng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 6 + rng.below(6);
    const std::size_t k = 3 + rng.below(3);
    Graph g = sample_graph(n, 0.4, rng.next_u64());
    const auto before = local_variance_cycles(g, k);

    std::vector<Vertex> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    const auto moved = local_variance_cycles(relabel(g, perm), k);
    CHECK(moved.Z == before.Z);
    CHECK(moved.V == before.V);
    CHECK(moved.W == before.W);
    CHECK(moved.per_edge_histogram() == before.per_edge_histogram());

    const Vertex u = static_cast<Vertex>(rng.below(n));
    const Vertex v = static_cast<Vertex>((u + 1 + rng.below(n - 1)) % n);
    g.add_edge(u, v);
    const auto after = local_variance_cycles(g, k);
    CHECK(after.Z >= before.Z);
    CHECK(after.V >= before.V);
  }
}

TEST_CASE("injections") {
  const Graph k4 = Graph::complete(4);
  CHECK(count_sigma0(k4, 3) == 24);

  // All 4^4 partitions of K_4 into F_1..F_4: Sigma is nonempty exactly for the
  // 24 bijective labelings, each contributing one injection.
  std::uint64_t total = 0;
  for (std::uint32_t code = 0; code < 256; ++code) {
    std::vector<std::uint32_t> labels(4);
    for (std::size_t v = 0; v < 4; ++v) labels[v] = (code >> (2 * v)) & 3U;
    const VertexPartition part(4, labels);
    const auto c = count_sigma(k4, 3, part);
    CHECK(c.sigma0 == 24);
    CHECK(c.sigma == oracle::injection_count(k4, 3, labels));
    CHECK(std::accumulate(c.sigma_by_start.begin(), c.sigma_by_start.end(), std::uint64_t{0}) == c.sigma);
    total += c.sigma;
  }
  CHECK(static_cast<double>(total) / 256.0 == doctest::Approx(24.0 / 256.0));

  CounterRng rng(99);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t k = 3 + rng.below(3);
    const std::size_t n = (k == 5 ? 8 : 7) + rng.below(2);
    const Graph g = sample_graph(n, rng.uniform(0.4, 0.9), rng.next_u64());
    const auto w = local_variance_cycles(g, k).W;
    const auto s0 = count_sigma0(g, k);
    CHECK(s0 == 4 * w);
    CHECK(s0 == oracle::injection_count(g, k));

    const VertexPartition part = random_partition(n, k, rng.next_u64());
    const std::vector<std::uint32_t> labels(part.labels().begin(), part.labels().end());
    const auto c = count_sigma(g, k, part);
    CHECK(c.sigma0 == s0);
    CHECK(c.sigma == oracle::injection_count(g, k, labels));
    CHECK(c.sigma <= c.sigma0);
  }
}

TEST_CASE("random partitions") {
  const auto a = random_partition(40, 4, 3);
  const auto b = random_partition(40, 4, 3);
  CHECK(a.classes() == 6);
  CHECK(std::equal(a.labels().begin(), a.labels().end(), b.labels().begin()));
  std::size_t members = 0;
  for (std::uint32_t c = 0; c < 6; ++c) {
    for (Vertex v : a.members(c)) CHECK(a.class_of(v) == c);
    members += a.members(c).size();
  }
  CHECK(members == 40);
  CHECK_THROWS(random_partition(5, 4, 1));
}

TEST_CASE("path counts against prefix enumeration") {
  CounterRng rng(5150);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t k = 3 + rng.below(2);
    const std::size_t n = 8 + rng.below(5);
    const double p = rng.uniform(0.4, 0.9);
    const Graph g = sample_graph(n, p, rng.next_u64());
    const VertexPartition part = random_partition(n, k, rng.next_u64());
    const std::vector<std::uint32_t> labels(part.labels().begin(), part.labels().end());
    const auto profile = graph::degree_buckets(g, 0.02);
    for (Vertex v : part.members(0)) {
      const auto counts = path_counts(g, k, p, part, v);
      const auto expected = oracle::prefix_counts(g, k, labels, v);
      CHECK(counts.by_length == expected);
      CHECK(counts.by_length[0] <= 1);
      const auto small_np = path_counts(g, k, 0.02, part, v);
      for (std::size_t l = 2; l <= counts.by_length.size(); ++l) {
        const auto& row = small_np.by_bucket[l - 1];
        CHECK(std::accumulate(row.begin(), row.end(), std::uint64_t{0}) == counts.by_length[l - 1]);
      }
    }
    for (Vertex v = 0; v < n; ++v) {
      if (part.class_of(v) != 0) CHECK_THROWS(path_counts(g, k, p, part, v));
    }
    CHECK(path_bound_diagnostic(g, k, p, part) >= 0.0);
  }
  const Graph empty(10);
  CHECK(path_bound_diagnostic(empty, 3, 0.5, random_partition(10, 3, 1)) == 0.0);
}

TEST_CASE("sigma decomposition") {
  CounterRng rng(2);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t k = 3 + rng.below(2);
    const std::size_t n = 8 + rng.below(4);
    const Graph g = sample_graph(n, 0.7, rng.next_u64());
    const VertexPartition part = random_partition(n, k, rng.next_u64());
    const std::vector<std::uint32_t> labels(part.labels().begin(), part.labels().end());
    // np = 0.1 puts every vertex of degree >= 2 outside V_1.
    const double p = 0.1 / static_cast<double>(n);
    const auto profile = graph::degree_buckets(g, p);
    const auto d = sigma_decomposition(g, k, part, p);
    CHECK(d.sigma1 + d.sigma2 == count_sigma(g, k, part).sigma);
    CHECK(d.Z == count_cycles(g, k));
    CHECK(d.traces_within_cycles());

    std::uint64_t light = 0;
    std::set<std::vector<Vertex>> traces;
    oracle::for_each_injection(g, k, labels, [&](const std::vector<Vertex>& s) {
      if (profile.bucket_of[s[0]] != 1) return;
      ++light;
      std::vector<Vertex> t{s[0]};
      t.insert(t.end(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end());
      traces.insert(t);
    });
    CHECK(d.sigma1 == light);
    CHECK(d.traces == traces.size());
  }
}

TEST_CASE("theorem 2 ratio") {
  const Graph k4 = Graph::complete(4);
  CHECK(theorem2_ratio(k4, 3, 1.0) == doctest::Approx(24.0 / 272.0));
  CHECK(theorem2_ratio(24, 4, 4.0, 3, RatioForm::kScaled) == doctest::Approx(24.0 / (64.0 * 4 + 4096.0)));
  CHECK(theorem2_ratio(0, 0, 0.0, 3) == 0.0);
  CHECK_THROWS(theorem2_ratio(5, 1, 0.0, 3));
}

TEST_CASE("guards and output") {
  CHECK_THROWS_AS(require_cycle_size(Graph(61), 6), GuardError);
  CHECK_NOTHROW(require_cycle_size(Graph(60), 6));
  CHECK_THROWS_AS(require_cycle_size(Graph(5), 2), std::invalid_argument);
  CHECK_THROWS_AS(require_cycle_size(Graph(4), 5), std::invalid_argument);
  CycleLimits tight;
  tight.max_vertices_k3 = 10;
  CHECK_THROWS_AS(count_cycles(Graph(11), 3, 1, tight), GuardError);
  CHECK_THROWS(CycleSet(3, {0, 1}));

  nlohmann::json j = local_variance_cycles(Graph::complete(4), 3);
  CHECK(j["k"] == 3);
  CHECK(j["Z"] == 4);
  CHECK(j["V"] == 24);
  CHECK(j["W"] == 6);
  CHECK(j["per_edge_histogram"] == nlohmann::json::array({0, 0, 6}));

  std::ostringstream out;
  write_cycles(out, enumerate_cycles(Graph::complete(4), 3));
  CHECK(out.str() == "0 1 2\n0 1 3\n0 2 3\n1 2 3\n");
}

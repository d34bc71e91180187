#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "concentra/errors.hpp"
#include "concentra/random_graph.hpp"

using namespace concentra;
using namespace concentra::graph;

TEST_CASE("edge index is a colex bijection") {
  CHECK(edge_index(0, 1) == 0);
  CHECK(edge_index(1, 0) == 0);
  CHECK(edge_index(0, 2) == 1);
  CHECK(edge_index(1, 2) == 2);
  CHECK(edge_index(0, 3) == 3);
  CHECK_THROWS(edge_index(2, 2));
  for (std::size_t n : {2u, 3u, 7u, 40u}) {
    std::set<std::uint64_t> seen;
    for (Vertex v = 1; v < n; ++v) {
      for (Vertex u = 0; u < v; ++u) {
        const auto e = edge_index(u, v);
        CHECK(e < edge_slots(n));
        CHECK(edge_endpoints(e) == std::pair<Vertex, Vertex>{u, v});
        seen.insert(e);
      }
    }
    CHECK(seen.size() == edge_slots(n));
  }
  CHECK(edge_endpoints(edge_index(70000, 123456)) == std::pair<Vertex, Vertex>{70000, 123456});
}

TEST_CASE("graph bookkeeping") {
  Graph g(5);
  CHECK(g.add_edge(0, 3));
  CHECK_FALSE(g.add_edge(3, 0));
  CHECK(g.add_edge(3, 4));
  CHECK(g.edge_count() == 2);
  CHECK(g.has_edge(4, 3));
  CHECK(g.has_edge_index(edge_index(0, 3)));
  CHECK(g.degree(3) == 2);
  CHECK(g.max_degree() == 2);
  CHECK(g.neighbors(3) == std::vector<Vertex>{0, 4});
  CHECK(g.remove_edge(0, 3));
  CHECK_FALSE(g.remove_edge(0, 3));
  CHECK(g.degree(0) == 0);
  CHECK_THROWS(g.add_edge(0, 5));
  CHECK_THROWS(g.add_edge(1, 1));

  const Graph k5 = Graph::complete(5);
  CHECK(k5.edge_count() == 10);
  for (Vertex v = 0; v < 5; ++v) CHECK(k5.degree(v) == 4);
  const Graph rebuilt = Graph::from_edges(5, k5.edge_list());
  CHECK(rebuilt == k5);
}

TEST_CASE("sampling is reproducible and has the right density") {
  const Graph a = sample_graph(100, 0.1, 42);
  const Graph b = sample_graph(100, 0.1, 42);
  const Graph c = sample_graph(100, 0.1, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(sample_graph(30, 0.0, 1).edge_count() == 0);
  CHECK(sample_graph(30, 1.0, 1).edge_count() == edge_slots(30));
  // 4950 slots at p = 0.1: mean 495, sd about 21.
  CHECK(std::abs(static_cast<double>(a.edge_count()) - 495.0) < 5 * 21.1);
  CHECK_THROWS(sample_graph(10, 1.5, 1));
  // Adjacency rows and degrees agree with the presence bits.
  for (Vertex v = 0; v < 100; ++v) CHECK(a.neighbors(v).size() == a.degree(v));
}

TEST_CASE("degree buckets") {
  const double np = 20.0;
  CHECK(degree_bucket(0, np) == 1);
  CHECK(degree_bucket(319, np) == 1);   // < 16 np
  CHECK(degree_bucket(320, np) == 2);   // [2^4 np, 2^5 np)
  CHECK(degree_bucket(639, np) == 2);
  CHECK(degree_bucket(640, np) == 3);
  CHECK(degree_bucket(1280, np) == 4);

  Graph star(50);
  for (Vertex v = 1; v < 50; ++v) star.add_edge(0, v);
  const auto profile = degree_buckets(star, 0.04);  // np = 2, 16 np = 32
  CHECK(profile.bucket_of[0] == 2);
  CHECK(profile.bucket(1).size() == 49);
  CHECK(profile.bucket(2).size() == 1);
  CHECK(profile.bucket(7).empty());
  CHECK_THROWS(degree_buckets(star, 0.0));
}

TEST_CASE("log conventions") {
  const LogConventions c;
  CHECK(c.guard() == doctest::Approx(std::exp(std::exp(1.0))));
  CHECK(c.bucket_ceiling(32.0) == 5.0);
  CHECK(c.bucket_ceiling(40.0) == 5.0);
  CHECK(c.loglog(std::exp(std::exp(1.0))) == doctest::Approx(1.0));
}

TEST_CASE("event E") {
  const Graph empty(400);
  const auto e = event_E(empty, 0.05);  // np = 20
  CHECK(e.holds);
  CHECK(e.degree_clause);
  CHECK(e.j_max == 4);
  CHECK(e.buckets.size() == 3);
  for (const auto& b : e.buckets) {
    CHECK(b.cardinality == 0);
    CHECK(b.threshold == doctest::Approx(20.0 / (b.j * std::ldexp(1.0, b.j) * std::log(std::log(20.0)))));
  }
  CHECK_THROWS_AS(event_E(empty, 0.01), PreconditionError);  // np = 4

  // A vertex of degree >= (np)^2 breaks the degree clause.
  Graph hub(500);
  for (Vertex v = 1; v < 500; ++v) hub.add_edge(0, v);
  const auto h = event_E(hub, 0.04);  // np = 20, (np)^2 = 400 <= 499
  CHECK_FALSE(h.degree_clause);
  CHECK_FALSE(h.holds);
  CHECK(lemma1_event(hub, 0.04));
  CHECK_FALSE(lemma1_event(empty, 0.05));
  CHECK_FALSE(lemma1_event(empty, 0.0));
}

TEST_CASE("lemma 2 event on a planted heavy bucket") {
  // np = 16: bucket 2 needs degree in [256, 512); threshold 16 / (8 loglog 16).
  Graph g(1000);
  const double p = 0.016;
  for (Vertex hub = 0; hub < 2; ++hub) {
    for (Vertex v = 10; v < 10 + 260; ++v) g.add_edge(hub, v);
  }
  const auto e = event_E(g, p);
  CHECK(e.buckets[0].cardinality == 2);
  CHECK(e.buckets[0].threshold < 2.0);
  CHECK_FALSE(e.bucket_clause);
  CHECK(lemma2_event(g, p));
  CHECK_FALSE(lemma2_event(Graph(1000), p));
}

TEST_CASE("event estimators") {
  const auto zero = estimate_lemma1(50, 0.0, 20, 1);
  CHECK(zero.estimate.frequency == 0.0);
  CHECK(zero.estimate.trials == 20);
  const auto sweep = sweep_graph_events(300, 20.0 / 300.0, 40, 7, 2);
  CHECK(sweep.event_e.trials == 40);
  CHECK(sweep.event_e.frequency == 1.0);
  CHECK(sweep.lemma1.frequency == 0.0);
  CHECK(sweep.lemma2.frequency == 0.0);
  const auto serial = sweep_graph_events(300, 20.0 / 300.0, 40, 7, 1);
  CHECK(serial.event_e.successes == sweep.event_e.successes);
  const auto small = sweep_graph_events(100, 0.05, 10, 7);  // np = 5 below the guard
  CHECK(small.event_e.trials == 0);
  CHECK(small.lemma1.trials == 10);
  CHECK_THROWS_AS(estimate_lemma2(100, 0.05, 10, 7), PreconditionError);
  const auto l2 = estimate_lemma2(300, 20.0 / 300.0, 10, 7);
  CHECK(l2.bound == doctest::Approx(std::exp(-400.0 / std::log(std::log(20.0)))));
}

TEST_CASE("edge list round trip") {
  const Graph g = sample_graph(20, 0.3, 5);
  std::stringstream buffer;
  write_edge_list(buffer, g);
  CHECK(read_edge_list(buffer) == g);

  std::istringstream with_comments("{\"n\": 4}\n# a comment\n\n0 1\n2 3\n");
  const Graph h = read_edge_list(with_comments);
  CHECK(h.edge_count() == 2);
  std::istringstream bad("{\"n\": 3}\n0 3\n");
  CHECK_THROWS(read_edge_list(bad));
  std::istringstream empty("{\"n\": 6}\n");
  CHECK(read_edge_list(empty).edge_count() == 0);
}

#pragma once

// G(n, p) graphs over a fixed colexicographic edge enumeration, the dyadic
// degree buckets
//
//     V_1 = {v : d_v < 16 np},   V_j = {v : 2^{j+2} np <= d_v < 2^{j+3} np}, j >= 2,
//
// the high-probability event E (no huge degree, every heavy bucket small), and
// Monte Carlo estimators for how often the degree conditions fail.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "concentra/stats.hpp"

namespace concentra::graph {

using Vertex = std::uint32_t;

// Colex index of edge {u, v}: max(u,v) * (max(u,v) - 1) / 2 + min(u,v).
// Symmetric and a bijection onto [0, n(n-1)/2). Throws for u == v.
std::uint64_t edge_index(Vertex u, Vertex v);
// Inverse of edge_index: (u, v) with u < v.
std::pair<Vertex, Vertex> edge_endpoints(std::uint64_t index);

constexpr std::uint64_t edge_slots(std::size_t n) noexcept {
  return static_cast<std::uint64_t>(n) * (n - (n > 0 ? 1 : 0)) / 2;
}

class Graph {
 public:
  explicit Graph(std::size_t n);
  static Graph complete(std::size_t n);
  static Graph from_edges(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges);

  std::size_t vertex_count() const noexcept { return n_; }
  std::uint64_t edge_slots() const noexcept { return concentra::graph::edge_slots(n_); }
  std::uint64_t edge_count() const noexcept { return edges_; }

  bool has_edge(Vertex u, Vertex v) const;
  bool has_edge_index(std::uint64_t index) const noexcept {
    return (presence_[index >> 6] >> (index & 63)) & 1U;
  }
  std::uint32_t degree(Vertex v) const { return degrees_.at(v); }
  const std::vector<std::uint32_t>& degrees() const noexcept { return degrees_; }
  std::uint32_t max_degree() const noexcept;

  // Adjacency row of v as 64-bit words; bit u of the row is set iff uv is an edge.
  std::span<const std::uint64_t> row(Vertex v) const noexcept {
    return {adjacency_.data() + static_cast<std::size_t>(v) * words_, words_};
  }
  std::size_t row_words() const noexcept { return words_; }
  std::vector<Vertex> neighbors(Vertex v) const;

  // Presence bits x_e over the colex enumeration.
  std::span<const std::uint64_t> presence() const noexcept { return presence_; }
  std::vector<std::pair<Vertex, Vertex>> edge_list() const;

  // Return false if the edge was already present / absent.
  bool add_edge(Vertex u, Vertex v);
  bool remove_edge(Vertex u, Vertex v);

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  void check_vertex(Vertex v) const;

  std::size_t n_;
  std::size_t words_;
  std::uint64_t edges_ = 0;
  std::vector<std::uint64_t> presence_;
  std::vector<std::uint64_t> adjacency_;
  std::vector<std::uint32_t> degrees_;
};

// Each edge present independently with probability p; edge e is present iff
// the counter-based uniform draw keyed by (seed, e) is below p. Identical
// inputs give identical graphs regardless of platform or threading.
Graph sample_graph(std::size_t n, double p, std::uint64_t seed);

// Base of the logarithm bounding the bucket index (j <= log(np)), and of the
// iterated logarithm in the bucket thresholds.
struct LogConventions {
  double bucket_ceiling_base = 2.0;
  double loglog_base = std::exp(1.0);

  double bucket_ceiling(double np) const;  // floor(log_base(np))
  double loglog(double np) const;          // log_b(log_b(np))
  // Smallest np for which loglog(np) > 1: base^base.
  double guard() const { return std::pow(loglog_base, loglog_base); }
};

struct DegreeProfile {
  double np = 0.0;
  std::vector<std::uint32_t> degrees;
  std::vector<int> bucket_of;                 // j for every vertex
  std::vector<std::vector<Vertex>> buckets;   // buckets[j - 1] = V_j

  std::span<const Vertex> bucket(int j) const;  // empty beyond the last bucket
  int max_bucket() const noexcept { return static_cast<int>(buckets.size()); }
};

// Bucket index of a degree: 1 if d < 16 np, otherwise the unique j >= 2 with
// 2^{j+2} np <= d < 2^{j+3} np.
int degree_bucket(double degree, double np);

// Requires np > 0.
DegreeProfile degree_buckets(const Graph& g, double p);

struct BucketCheck {
  int j = 0;
  std::size_t cardinality = 0;
  double threshold = 0.0;  // np / (j 2^j loglog np)
};

struct EventEResult {
  bool holds = false;
  bool degree_clause = false;   // max_degree <= (np)^2
  bool bucket_clause = false;   // every checked bucket within its threshold
  std::uint32_t max_degree = 0;
  double np = 0.0;
  int j_max = 0;                // buckets 2..j_max are checked
  std::vector<BucketCheck> buckets;
};

// Throws PreconditionError when np <= conventions.guard().
EventEResult event_E(const Graph& g, double p, const LogConventions& conventions = {});

// Some vertex has degree >= (np)^2 (and > 0, so the empty graph never qualifies).
bool lemma1_event(const Graph& g, double p);
// Some bucket 2 <= j <= j_max has card V_j >= np / (j 2^j loglog np).
// Throws PreconditionError when np <= conventions.guard().
bool lemma2_event(const Graph& g, double p, const LogConventions& conventions = {});

struct LemmaEstimate {
  stats::ProportionEstimate estimate;
  double bound = 0.0;  // Lemma 1: exp(-(np)^2 / 2); Lemma 2: exp(-(np)^2 / (C loglog np))
};

struct GraphEventSweep {
  stats::ProportionEstimate event_e;
  stats::ProportionEstimate lemma1;
  stats::ProportionEstimate lemma2;
};

// Samples `trials` graphs with seeds derive_seed(seed, i) and counts how often
// E, the Lemma 1 event and the Lemma 2 event occur. p = 0 short-circuits to
// all-empty graphs (E holds, the other events never occur). When
// 0 < np <= guard the bucket thresholds are undefined, so event_e and lemma2
// come back with zero trials.
GraphEventSweep sweep_graph_events(std::size_t n, double p, std::size_t trials,
                                   std::uint64_t seed, unsigned threads = 1,
                                   const LogConventions& conventions = {});

LemmaEstimate estimate_lemma1(std::size_t n, double p, std::size_t trials, std::uint64_t seed,
                              unsigned threads = 1);
LemmaEstimate estimate_lemma2(std::size_t n, double p, std::size_t trials, std::uint64_t seed,
                              double c = 1.0, unsigned threads = 1,
                              const LogConventions& conventions = {});

// Edge-list text format: a first line holding a JSON header {"n": int},
// then one "u v" pair (0-based) per line. Blank lines and lines starting with
// '#' are ignored.
Graph read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const Graph& g);

}  // namespace concentra::graph

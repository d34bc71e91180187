#pragma once

// k-cycles of a graph: enumeration in canonical form, the per-edge counts N_e,
// the local variance V = sum over present e of N_e^2, the count W of cycle
// pairs glued along a single edge, and the injection sets used to bound W.
//
// An injection sigma : {1, ..., 2k-2} -> vertices encodes the ordered pair of
// cycles (sigma(1), ..., sigma(k)) and (sigma(k), ..., sigma(2k-2), sigma(1)),
// whose only common edge is sigma(1) sigma(k). Positions are 0-based in code.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "concentra/random_graph.hpp"

namespace concentra::cycles {

using graph::Graph;
using graph::Vertex;

// Largest n accepted for a given k. The defaults keep enumeration at desk scale.
struct CycleLimits {
  std::size_t max_vertices_k3 = 2000;
  std::size_t max_vertices_k4 = 1000;
  std::size_t max_vertices_k5 = 300;
  std::size_t max_vertices_other = 60;

  std::size_t max_vertices(std::size_t k) const;
};

// Throws std::invalid_argument unless 3 <= k <= n, GuardError when n exceeds
// the limit for k.
void require_cycle_size(const Graph& g, std::size_t k, const CycleLimits& limits = {});

class CycleSet {
 public:
  CycleSet(std::size_t k, std::vector<Vertex> flat);

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return k_ == 0 ? 0 : flat_.size() / k_; }
  bool empty() const noexcept { return flat_.empty(); }
  std::span<const Vertex> operator[](std::size_t i) const { return {flat_.data() + i * k_, k_}; }
  std::span<const Vertex> flat() const noexcept { return flat_; }

  // Colex edge indices of cycle i, in traversal order.
  std::vector<std::uint64_t> edges(std::size_t i) const;

 private:
  std::size_t k_;
  std::vector<Vertex> flat_;
};

// Canonical form: smallest vertex first, then the smaller of its two cycle
// neighbours. Returns the canonical rotation/reflection of `cycle`.
std::vector<Vertex> canonical_cycle(std::span<const Vertex> cycle);

// All k-cycles, each once, in canonical form, sorted lexicographically.
CycleSet enumerate_cycles(const Graph& g, std::size_t k, unsigned threads = 1,
                          const CycleLimits& limits = {});

// Same count as enumerate_cycles without storing cycles; k = 3 uses the
// bitset triangle count.
std::uint64_t count_cycles(const Graph& g, std::size_t k, unsigned threads = 1,
                           const CycleLimits& limits = {});
// Generic DFS count, also for k = 3.
std::uint64_t count_cycles_dfs(const Graph& g, std::size_t k, unsigned threads = 1,
                               const CycleLimits& limits = {});
std::uint64_t count_triangles(const Graph& g);

struct EdgeCount {
  std::uint64_t edge = 0;   // colex index
  std::uint64_t cycles = 0; // N_e
  friend bool operator==(const EdgeCount&, const EdgeCount&) = default;
};

struct CycleStatistics {
  std::size_t k = 0;
  std::uint64_t Z = 0;
  // N_e for every present edge, ordered by edge index; zero for edges on no cycle.
  std::vector<EdgeCount> per_edge;
  std::uint64_t V = 0;
  // Unordered pairs of cycles sharing exactly one edge and no other vertex.
  std::uint64_t W = 0;
  // Unordered pairs sharing exactly one edge, other common vertices allowed.
  // Equals W for k = 3.
  std::uint64_t single_shared_edge_pairs = 0;

  // histogram[c] = number of present edges lying on exactly c cycles.
  std::vector<std::uint64_t> per_edge_histogram() const;
};

CycleStatistics local_variance_cycles(const Graph& g, std::size_t k, unsigned threads = 1,
                                      const CycleLimits& limits = {});
CycleStatistics local_variance_cycles(const Graph& g, const CycleSet& cycles);

std::uint64_t count_shared_edge_pairs(const Graph& g, std::size_t k,
                                      const CycleLimits& limits = {});

// Vertex partition F_1, ..., F_{2k-2}, stored as a class label per vertex.
class VertexPartition {
 public:
  VertexPartition(std::size_t classes, std::vector<std::uint32_t> class_of);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t vertex_count() const noexcept { return class_of_.size(); }
  std::uint32_t class_of(Vertex v) const { return class_of_.at(v); }
  std::span<const std::uint32_t> labels() const noexcept { return class_of_; }
  std::vector<Vertex> members(std::uint32_t c) const;

 private:
  std::size_t classes_;
  std::vector<std::uint32_t> class_of_;
};

// Each vertex lands in one of the 2k-2 classes independently and uniformly.
// Requires n >= 2k - 2.
VertexPartition random_partition(std::size_t n, std::size_t k, std::uint64_t seed);

// Card Sigma_0.
std::uint64_t count_sigma0(const Graph& g, std::size_t k, const CycleLimits& limits = {});

struct InjectionCount {
  std::uint64_t sigma0 = 0;
  std::uint64_t sigma = 0;
  std::vector<std::uint64_t> sigma_by_start;  // card {sigma in Sigma : sigma(1) = v}
};

InjectionCount count_sigma(const Graph& g, std::size_t k, const VertexPartition& partition,
                           const CycleLimits& limits = {});

struct PathCounts {
  Vertex start = 0;
  // by_length[l - 1] = card S_l(v), l = 1 .. 2k-2.
  std::vector<std::uint64_t> by_length;
  // by_bucket[l - 1][j - 1] = card S_l^j(v): prefixes whose entry l-1 lies in
  // V_j. Empty for l = 1.
  std::vector<std::vector<std::uint64_t>> by_bucket;
};

// Prefixes (sigma(1), ..., sigma(l)) of injections in Sigma with sigma(1) = v.
// Throws std::invalid_argument unless v is in F_1 and np > 0.
PathCounts path_counts(const Graph& g, std::size_t k, double p, const VertexPartition& partition,
                       Vertex v);

// max over v in F_1 and l >= 2 of card S_l(v) / (d_v^+ (np)^{l-2}), with
// d_v^+ = max(d_v, np). Zero when no prefix exists.
double path_bound_diagnostic(const Graph& g, std::size_t k, double p,
                             const VertexPartition& partition);

enum class RatioForm {
  kStated,  // V / ((np)^{k-2} Z + (np)^{2(k-1)})
  kScaled,  // V / ((np)^k Z + (np)^{2k})
};

double theorem2_ratio(std::uint64_t V, std::uint64_t Z, double np, std::size_t k,
                      RatioForm form = RatioForm::kStated);
double theorem2_ratio(const Graph& g, std::size_t k, double p,
                      RatioForm form = RatioForm::kStated);

struct SigmaDecomposition {
  std::uint64_t sigma1 = 0;  // sigma(1) in V_1
  std::uint64_t sigma2 = 0;  // sigma(1) in V_j, j >= 2
  std::uint64_t traces = 0;  // distinct (sigma(1), sigma(k), ..., sigma(2k-2)) over Sigma_1
  std::uint64_t Z = 0;
  bool traces_within_cycles() const noexcept { return traces <= Z; }
};

SigmaDecomposition sigma_decomposition(const Graph& g, std::size_t k,
                                       const VertexPartition& partition, double p);

void to_json(nlohmann::json& j, const CycleStatistics& s);
// One cycle per line, vertices separated by spaces.
void write_cycles(std::ostream& out, const CycleSet& cycles);

}  // namespace concentra::cycles

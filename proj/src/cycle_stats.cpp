#include "concentra/cycle_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "concentra/errors.hpp"
#include "concentra/parallel.hpp"
#include "concentra/rng.hpp"

namespace concentra::cycles {

namespace {

using Words = std::vector<std::uint64_t>;

// Bits of vertices strictly greater than x, restricted to word w.
std::uint64_t above(std::size_t x, std::size_t w) noexcept {
  const std::size_t lo = w * 64;
  if (x + 1 <= lo) return ~std::uint64_t{0};
  if (x >= lo + 63) return 0;
  return ~std::uint64_t{0} << (x - lo + 1);
}

void set_bit(Words& words, Vertex v) { words[v >> 6] |= std::uint64_t{1} << (v & 63); }
void clear_bit(Words& words, Vertex v) { words[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }

template <class Fn>
void for_each_bit(const Words& words, Fn&& fn) {
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::uint64_t bits = words[w]; bits != 0; bits &= bits - 1) {
      fn(static_cast<Vertex>(w * 64 + std::countr_zero(bits)));
    }
  }
}

std::uint64_t popcount(const Words& words) {
  std::uint64_t total = 0;
  for (std::uint64_t w : words) total += std::popcount(w);
  return total;
}

// DFS over canonical cycles starting at their minimal vertex s. Calls
// leaf(path, candidates) at depth k-1, where candidates holds the admissible
// final vertices; emit mode iterates them, count mode pops them.
class CycleWalker {
 public:
  CycleWalker(const Graph& g, std::size_t k)
      : g_(g), k_(k), words_(g.row_words()), used_(words_, 0), path_(k, 0) {}

  template <class Leaf>
  void from(Vertex s, Leaf&& leaf) {
    path_[0] = s;
    set_bit(used_, s);
    extend(1, leaf);
    clear_bit(used_, s);
  }

 private:
  template <class Leaf>
  void extend(std::size_t depth, Leaf& leaf) {
    const Vertex s = path_[0];
    const auto last = g_.row(path_[depth - 1]);
    Words candidates(words_);
    if (depth + 1 == k_) {
      const auto first = g_.row(s);
      for (std::size_t w = 0; w < words_; ++w) {
        candidates[w] = last[w] & first[w] & ~used_[w] & above(path_[1], w);
      }
      leaf(path_, candidates);
      return;
    }
    for (std::size_t w = 0; w < words_; ++w) candidates[w] = last[w] & ~used_[w] & above(s, w);
    for_each_bit(candidates, [&](Vertex v) {
      path_[depth] = v;
      set_bit(used_, v);
      extend(depth + 1, leaf);
      clear_bit(used_, v);
    });
  }

  const Graph& g_;
  std::size_t k_;
  std::size_t words_;
  Words used_;
  std::vector<Vertex> path_;
};

// DFS over injections sigma in Sigma_0, optionally restricted to a partition.
class InjectionWalker {
 public:
  InjectionWalker(const Graph& g, std::size_t k, const VertexPartition* partition)
      : g_(g),
        k_(k),
        length_(2 * k - 2),
        words_(g.row_words()),
        used_(words_, 0),
        sigma_(length_, 0) {
    if (partition != nullptr) {
      class_masks_.assign(length_, Words(words_, 0));
      for (Vertex v = 0; v < g.vertex_count(); ++v) {
        const auto c = partition->class_of(v);
        if (c < length_) set_bit(class_masks_[c], v);
      }
    }
  }

  std::size_t length() const noexcept { return length_; }
  std::span<const Vertex> sigma() const noexcept { return sigma_; }

  bool admissible_start(Vertex v) const {
    return class_masks_.empty() || ((class_masks_[0][v >> 6] >> (v & 63)) & 1U);
  }

  // Candidates for position i given positions 0..i-1.
  void candidates(std::size_t i, Words& out) const {
    const auto prev = g_.row(sigma_[i - 1]);
    const auto first = g_.row(sigma_[0]);
    const bool closes = i + 1 == k_ || i + 1 == length_;
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = prev[w] & ~used_[w];
      if (closes) bits &= first[w];
      if (!class_masks_.empty()) bits &= class_masks_[i][w];
      out[w] = bits;
    }
  }

  template <class Body>
  auto with_start(Vertex v, Body&& body) {
    sigma_[0] = v;
    set_bit(used_, v);
    auto result = body();
    clear_bit(used_, v);
    return result;
  }

  // Number of complete injections with sigma(1) = v.
  std::uint64_t count_from(Vertex v) {
    if (!admissible_start(v)) return 0;
    return with_start(v, [&] { return count(1); });
  }

  // Calls leaf() on every complete injection with sigma(1) = v.
  template <class Leaf>
  void visit_from(Vertex v, Leaf&& leaf) {
    if (!admissible_start(v)) return;
    with_start(v, [&] {
      visit(1, leaf);
      return 0;
    });
  }

  // Calls on_prefix(length) for every prefix of length 1..L that extends to a
  // complete injection; sigma() holds the prefix during the call.
  template <class OnPrefix>
  void prefixes_from(Vertex v, OnPrefix&& on_prefix) {
    if (!admissible_start(v)) return;
    with_start(v, [&] {
      prefixes(1, on_prefix);
      return 0;
    });
  }

 private:
  std::uint64_t count(std::size_t i) {
    Words next(words_);
    candidates(i, next);
    if (i + 1 == length_) return popcount(next);
    std::uint64_t total = 0;
    for_each_bit(next, [&](Vertex u) {
      sigma_[i] = u;
      set_bit(used_, u);
      total += count(i + 1);
      clear_bit(used_, u);
    });
    return total;
  }

  template <class Leaf>
  void visit(std::size_t i, Leaf& leaf) {
    if (i == length_) {
      leaf();
      return;
    }
    Words next(words_);
    candidates(i, next);
    for_each_bit(next, [&](Vertex u) {
      sigma_[i] = u;
      set_bit(used_, u);
      visit(i + 1, leaf);
      clear_bit(used_, u);
    });
  }

  template <class OnPrefix>
  bool prefixes(std::size_t placed, OnPrefix& on_prefix) {
    bool extends = placed == length_;
    if (!extends) {
      Words next(words_);
      candidates(placed, next);
      for_each_bit(next, [&](Vertex u) {
        sigma_[placed] = u;
        set_bit(used_, u);
        if (prefixes(placed + 1, on_prefix)) extends = true;
        clear_bit(used_, u);
      });
    }
    if (extends) on_prefix(placed);
    return extends;
  }

  const Graph& g_;
  std::size_t k_;
  std::size_t length_;
  std::size_t words_;
  Words used_;
  std::vector<Vertex> sigma_;
  std::vector<Words> class_masks_;
};

void require_partition(const Graph& g, std::size_t k, const VertexPartition& partition) {
  if (partition.vertex_count() != g.vertex_count() || partition.classes() != 2 * k - 2) {
    throw std::invalid_argument("partition does not match the graph and cycle length");
  }
}

double require_np(const Graph& g, double p) {
  const double np = static_cast<double>(g.vertex_count()) * p;
  if (!(np > 0.0)) throw std::invalid_argument("need np > 0");
  return np;
}

}  // namespace

std::size_t CycleLimits::max_vertices(std::size_t k) const {
  switch (k) {
    case 3: return max_vertices_k3;
    case 4: return max_vertices_k4;
    case 5: return max_vertices_k5;
    default: return max_vertices_other;
  }
}

void require_cycle_size(const Graph& g, std::size_t k, const CycleLimits& limits) {
  const std::size_t n = g.vertex_count();
  if (k < 3 || k > n) {
    throw std::invalid_argument("cycle length k = " + std::to_string(k) +
                                " must satisfy 3 <= k <= n = " + std::to_string(n));
  }
  if (n > limits.max_vertices(k)) {
    throw GuardError("n = " + std::to_string(n) + " exceeds the enumeration limit " +
                     std::to_string(limits.max_vertices(k)) + " for k = " + std::to_string(k));
  }
}

CycleSet::CycleSet(std::size_t k, std::vector<Vertex> flat) : k_(k), flat_(std::move(flat)) {
  if (k < 3 || flat_.size() % k != 0) throw std::invalid_argument("CycleSet: ragged cycle list");
}

std::vector<std::uint64_t> CycleSet::edges(std::size_t i) const {
  const auto c = (*this)[i];
  std::vector<std::uint64_t> out(k_);
  for (std::size_t j = 0; j < k_; ++j) out[j] = graph::edge_index(c[j], c[(j + 1) % k_]);
  return out;
}

std::vector<Vertex> canonical_cycle(std::span<const Vertex> cycle) {
  const std::size_t k = cycle.size();
  if (k < 3) throw std::invalid_argument("canonical_cycle: need at least 3 vertices");
  const std::size_t at = static_cast<std::size_t>(std::min_element(cycle.begin(), cycle.end()) -
                                                  cycle.begin());
  const Vertex next = cycle[(at + 1) % k];
  const Vertex prev = cycle[(at + k - 1) % k];
  std::vector<Vertex> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = next < prev ? cycle[(at + j) % k] : cycle[(at + k - j) % k];
  }
  return out;
}

CycleSet enumerate_cycles(const Graph& g, std::size_t k, unsigned threads,
                          const CycleLimits& limits) {
  require_cycle_size(g, k, limits);
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<Vertex>> per_start(n);
  parallel_for(n, threads, [&](std::size_t s) {
    CycleWalker walker(g, k);
    auto& out = per_start[s];
    walker.from(static_cast<Vertex>(s), [&](const std::vector<Vertex>& path, const Words& last) {
      for_each_bit(last, [&](Vertex v) {
        out.insert(out.end(), path.begin(), path.end() - 1);
        out.push_back(v);
      });
    });
  });
  std::vector<Vertex> flat;
  for (auto& part : per_start) flat.insert(flat.end(), part.begin(), part.end());
  return {k, std::move(flat)};
}

std::uint64_t count_triangles(const Graph& g) {
  const std::size_t words = g.row_words();
  std::uint64_t total = 0;
  for (Vertex u = 0; u < g.vertex_count(); ++u) {
    const auto ru = g.row(u);
    for (std::size_t w = 0; w < words; ++w) {
      for (std::uint64_t bits = ru[w] & above(u, w); bits != 0; bits &= bits - 1) {
        const auto v = static_cast<Vertex>(w * 64 + std::countr_zero(bits));
        const auto rv = g.row(v);
        for (std::size_t x = v >> 6; x < words; ++x) {
          total += std::popcount(ru[x] & rv[x] & above(v, x));
        }
      }
    }
  }
  return total;
}

std::uint64_t count_cycles_dfs(const Graph& g, std::size_t k, unsigned threads,
                               const CycleLimits& limits) {
  require_cycle_size(g, k, limits);
  const std::size_t n = g.vertex_count();
  std::vector<std::uint64_t> per_start(n, 0);
  parallel_for(n, threads, [&](std::size_t s) {
    CycleWalker walker(g, k);
    walker.from(static_cast<Vertex>(s), [&](const std::vector<Vertex>&, const Words& last) {
      per_start[s] += popcount(last);
    });
  });
  std::uint64_t total = 0;
  for (auto c : per_start) total += c;
  return total;
}

std::uint64_t count_cycles(const Graph& g, std::size_t k, unsigned threads,
                           const CycleLimits& limits) {
  if (k == 3) {
    require_cycle_size(g, k, limits);
    return count_triangles(g);
  }
  return count_cycles_dfs(g, k, threads, limits);
}

std::vector<std::uint64_t> CycleStatistics::per_edge_histogram() const {
  std::vector<std::uint64_t> histogram;
  for (const auto& e : per_edge) {
    if (e.cycles >= histogram.size()) histogram.resize(e.cycles + 1, 0);
    ++histogram[e.cycles];
  }
  return histogram;
}

CycleStatistics local_variance_cycles(const Graph& g, const CycleSet& cycles) {
  const std::size_t k = cycles.k();
  const std::size_t z = cycles.size();
  CycleStatistics stats;
  stats.k = k;
  stats.Z = z;

  // Sorted vertex and edge sets per cycle, and (edge, cycle) incidences.
  std::vector<Vertex> vertices(cycles.flat().begin(), cycles.flat().end());
  std::vector<std::uint64_t> edges(z * k);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> incidences;
  incidences.reserve(z * k);
  for (std::size_t c = 0; c < z; ++c) {
    std::sort(vertices.begin() + c * k, vertices.begin() + (c + 1) * k);
    const auto ce = cycles.edges(c);
    for (std::uint64_t e : ce) {
      if (!g.has_edge_index(e)) throw std::invalid_argument("cycle uses an absent edge");
      incidences.emplace_back(e, static_cast<std::uint32_t>(c));
    }
    std::copy(ce.begin(), ce.end(), edges.begin() + c * k);
    std::sort(edges.begin() + c * k, edges.begin() + (c + 1) * k);
  }
  std::sort(incidences.begin(), incidences.end());

  auto shared = [k](const auto& pool, std::size_t a, std::size_t b) {
    std::size_t count = 0;
    for (std::size_t i = a * k, j = b * k; i < (a + 1) * k && j < (b + 1) * k;) {
      if (pool[i] < pool[j]) {
        ++i;
      } else if (pool[j] < pool[i]) {
        ++j;
      } else {
        ++count;
        ++i;
        ++j;
      }
    }
    return count;
  };

  std::size_t at = 0;
  for (const auto& [u, v] : g.edge_list()) {
    const std::uint64_t e = graph::edge_index(u, v);
    const std::size_t begin = at;
    while (at < incidences.size() && incidences[at].first == e) ++at;
    const std::uint64_t ne = at - begin;
    stats.per_edge.push_back({e, ne});
    stats.V += ne * ne;
    for (std::size_t i = begin; i < at; ++i) {
      for (std::size_t j = i + 1; j < at; ++j) {
        const auto a = incidences[i].second;
        const auto b = incidences[j].second;
        if (shared(edges, a, b) != 1) continue;
        ++stats.single_shared_edge_pairs;
        if (shared(vertices, a, b) == 2) ++stats.W;
      }
    }
  }
  return stats;
}

CycleStatistics local_variance_cycles(const Graph& g, std::size_t k, unsigned threads,
                                      const CycleLimits& limits) {
  return local_variance_cycles(g, enumerate_cycles(g, k, threads, limits));
}

std::uint64_t count_shared_edge_pairs(const Graph& g, std::size_t k, const CycleLimits& limits) {
  return local_variance_cycles(g, k, 1, limits).W;
}

VertexPartition::VertexPartition(std::size_t classes, std::vector<std::uint32_t> class_of)
    : classes_(classes), class_of_(std::move(class_of)) {
  for (auto c : class_of_) {
    if (c >= classes_) throw std::invalid_argument("partition label out of range");
  }
}

std::vector<Vertex> VertexPartition::members(std::uint32_t c) const {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < class_of_.size(); ++v) {
    if (class_of_[v] == c) out.push_back(v);
  }
  return out;
}

VertexPartition random_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 3) throw std::invalid_argument("random_partition: need k >= 3");
  const std::size_t classes = 2 * k - 2;
  if (n < classes) {
    throw std::invalid_argument("random_partition: need n >= 2k - 2 = " + std::to_string(classes));
  }
  CounterRng rng(seed, 0xf1);
  std::vector<std::uint32_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint32_t>(rng.below(classes));
  return {classes, std::move(labels)};
}

std::uint64_t count_sigma0(const Graph& g, std::size_t k, const CycleLimits& limits) {
  require_cycle_size(g, k, limits);
  InjectionWalker walker(g, k, nullptr);
  std::uint64_t total = 0;
  for (Vertex v = 0; v < g.vertex_count(); ++v) total += walker.count_from(v);
  return total;
}

InjectionCount count_sigma(const Graph& g, std::size_t k, const VertexPartition& partition,
                           const CycleLimits& limits) {
  require_cycle_size(g, k, limits);
  require_partition(g, k, partition);
  InjectionCount result;
  result.sigma0 = count_sigma0(g, k, limits);
  InjectionWalker walker(g, k, &partition);
  result.sigma_by_start.assign(g.vertex_count(), 0);
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    result.sigma_by_start[v] = walker.count_from(v);
    result.sigma += result.sigma_by_start[v];
  }
  return result;
}

PathCounts path_counts(const Graph& g, std::size_t k, double p, const VertexPartition& partition,
                       Vertex v) {
  require_cycle_size(g, k);
  require_partition(g, k, partition);
  if (partition.class_of(v) != 0) throw std::invalid_argument("path_counts: v must lie in F_1");
  const auto profile = graph::degree_buckets(g, p);

  InjectionWalker walker(g, k, &partition);
  const std::size_t length = walker.length();
  PathCounts counts;
  counts.start = v;
  counts.by_length.assign(length, 0);
  counts.by_bucket.assign(length, {});
  walker.prefixes_from(v, [&](std::size_t l) {
    ++counts.by_length[l - 1];
    if (l < 2) return;
    const auto j = static_cast<std::size_t>(profile.bucket_of[walker.sigma()[l - 2]]);
    auto& row = counts.by_bucket[l - 1];
    if (row.size() < j) row.resize(j, 0);
    ++row[j - 1];
  });
  return counts;
}

double path_bound_diagnostic(const Graph& g, std::size_t k, double p,
                             const VertexPartition& partition) {
  const double np = require_np(g, p);
  double worst = 0.0;
  for (Vertex v : partition.members(0)) {
    const PathCounts counts = path_counts(g, k, p, partition, v);
    const double d_plus = std::max(static_cast<double>(g.degree(v)), np);
    for (std::size_t l = 2; l <= counts.by_length.size(); ++l) {
      const double ratio = static_cast<double>(counts.by_length[l - 1]) /
                           (d_plus * std::pow(np, static_cast<double>(l - 2)));
      worst = std::max(worst, ratio);
    }
  }
  return worst;
}

double theorem2_ratio(std::uint64_t V, std::uint64_t Z, double np, std::size_t k,
                      RatioForm form) {
  if (V == 0) return 0.0;
  const double kd = static_cast<double>(k);
  const double denominator =
      form == RatioForm::kStated
          ? std::pow(np, kd - 2.0) * static_cast<double>(Z) + std::pow(np, 2.0 * (kd - 1.0))
          : std::pow(np, kd) * static_cast<double>(Z) + std::pow(np, 2.0 * kd);
  if (!(denominator > 0.0)) throw std::invalid_argument("theorem2_ratio: need np > 0");
  return static_cast<double>(V) / denominator;
}

double theorem2_ratio(const Graph& g, std::size_t k, double p, RatioForm form) {
  const CycleStatistics stats = local_variance_cycles(g, k);
  return theorem2_ratio(stats.V, stats.Z, static_cast<double>(g.vertex_count()) * p, k, form);
}

SigmaDecomposition sigma_decomposition(const Graph& g, std::size_t k,
                                       const VertexPartition& partition, double p) {
  require_cycle_size(g, k);
  require_partition(g, k, partition);
  const auto profile = graph::degree_buckets(g, p);
  InjectionWalker walker(g, k, &partition);
  SigmaDecomposition result;
  std::vector<Vertex> traces;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const bool light = profile.bucket_of[v] == 1;
    walker.visit_from(v, [&] {
      if (!light) {
        ++result.sigma2;
        return;
      }
      ++result.sigma1;
      const auto s = walker.sigma();
      traces.push_back(s[0]);
      traces.insert(traces.end(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end());
    });
  }
  // Sort fixed-width trace records and count distinct ones.
  std::vector<std::span<const Vertex>> records;
  for (std::size_t i = 0; i < traces.size(); i += k) records.emplace_back(traces.data() + i, k);
  auto less = [](auto a, auto b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };
  std::sort(records.begin(), records.end(), less);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i == 0 || less(records[i - 1], records[i])) ++result.traces;
  }
  result.Z = count_cycles(g, k);
  return result;
}

void to_json(nlohmann::json& j, const CycleStatistics& s) {
  j = nlohmann::json{{"k", s.k},
                     {"Z", s.Z},
                     {"V", s.V},
                     {"W", s.W},
                     {"per_edge_histogram", s.per_edge_histogram()}};
}

void write_cycles(std::ostream& out, const CycleSet& cycles) {
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    const auto c = cycles[i];
    for (std::size_t j = 0; j < c.size(); ++j) out << (j ? " " : "") << c[j];
    out << '\n';
  }
}

}  // namespace concentra::cycles

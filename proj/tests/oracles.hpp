#pragma once

// Slow, direct reference computations used to check the library.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include "concentra/random_graph.hpp"

namespace oracle {

using concentra::graph::Graph;
using concentra::graph::Vertex;

// Minimum of |sum_i w_i p_i| over the simplex by pairwise weight exchange with
// exact line search, run until no exchange improves the objective.
inline double min_norm(std::size_t dim, const std::vector<std::uint64_t>& points) {
  const std::size_t g = points.size();
  std::vector<std::vector<double>> p(g, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t d = 0; d < dim; ++d) p[i][d] = (points[i] >> d) & 1U;
  }
  std::vector<double> w(g, 1.0 / static_cast<double>(g));
  std::vector<double> s(dim, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t d = 0; d < dim; ++d) s[d] += w[i] * p[i][d];
  }
  auto norm2 = [&] {
    double t = 0.0;
    for (double v : s) t += v * v;
    return t;
  };
  for (int sweep = 0; sweep < 200000; ++sweep) {
    const double before = norm2();
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < g; ++j) {
        if (i == j) continue;
        // Move delta from j to i: s += delta (p_i - p_j), delta in [-w_i, w_j].
        double sd = 0.0, dd = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = p[i][d] - p[j][d];
          sd += s[d] * diff;
          dd += diff * diff;
        }
        if (dd == 0.0) continue;
        const double delta = std::clamp(-sd / dd, -w[i], w[j]);
        w[i] += delta;
        w[j] -= delta;
        for (std::size_t d = 0; d < dim; ++d) s[d] += delta * (p[i][d] - p[j][d]);
      }
    }
    if (before - norm2() <= 1e-18) break;
  }
  return std::sqrt(std::max(0.0, norm2()));
}

// Minimum over the segment between two points, on a dense grid of weights.
inline double segment_grid_min(std::size_t dim, std::uint64_t a, std::uint64_t b, int steps) {
  double best = 1e300;
  for (int s = 0; s <= steps; ++s) {
    const double l = static_cast<double>(s) / steps;
    double n2 = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = l * ((a >> d) & 1U) + (1.0 - l) * ((b >> d) & 1U);
      n2 += v * v;
    }
    best = std::min(best, std::sqrt(n2));
  }
  return best;
}

inline bool adjacent(const Graph& g, Vertex u, Vertex v) { return u != v && g.has_edge(u, v); }

// k-cycles by trying every vertex subset and every cyclic order of it.
inline std::uint64_t cycle_count(const Graph& g, std::size_t k) {
  const std::size_t n = g.vertex_count();
  std::uint64_t total = 0;
  std::vector<int> choose(n, 0);
  std::fill(choose.end() - static_cast<std::ptrdiff_t>(k), choose.end(), 1);
  do {
    std::vector<Vertex> subset;
    for (Vertex v = 0; v < n; ++v) {
      if (choose[v]) subset.push_back(v);
    }
    // Fix subset[0] first and permute the rest; each cycle appears twice.
    std::vector<Vertex> rest(subset.begin() + 1, subset.end());
    std::uint64_t orders = 0;
    do {
      bool ok = adjacent(g, subset[0], rest.front()) && adjacent(g, rest.back(), subset[0]);
      for (std::size_t i = 0; ok && i + 1 < rest.size(); ++i) ok = adjacent(g, rest[i], rest[i + 1]);
      orders += ok;
    } while (std::next_permutation(rest.begin(), rest.end()));
    total += orders / 2;
  } while (std::next_permutation(choose.begin(), choose.end()));
  return total;
}

struct BruteCycle {
  std::vector<Vertex> vertices;        // sorted
  std::vector<std::uint64_t> edges;    // sorted colex indices
};

// Every k-cycle as vertex and edge sets.
inline std::vector<BruteCycle> cycles(const Graph& g, std::size_t k) {
  const std::size_t n = g.vertex_count();
  std::set<std::vector<std::uint64_t>> seen;
  std::vector<BruteCycle> out;
  std::vector<int> choose(n, 0);
  std::fill(choose.end() - static_cast<std::ptrdiff_t>(k), choose.end(), 1);
  do {
    std::vector<Vertex> subset;
    for (Vertex v = 0; v < n; ++v) {
      if (choose[v]) subset.push_back(v);
    }
    std::vector<Vertex> rest(subset.begin() + 1, subset.end());
    do {
      std::vector<Vertex> order{subset[0]};
      order.insert(order.end(), rest.begin(), rest.end());
      bool ok = true;
      std::vector<std::uint64_t> edges;
      for (std::size_t i = 0; ok && i < k; ++i) {
        const Vertex a = order[i], b = order[(i + 1) % k];
        ok = adjacent(g, a, b);
        if (ok) edges.push_back(concentra::graph::edge_index(a, b));
      }
      if (!ok) continue;
      std::sort(edges.begin(), edges.end());
      if (seen.insert(edges).second) out.push_back({subset, edges});
    } while (std::next_permutation(rest.begin(), rest.end()));
  } while (std::next_permutation(choose.begin(), choose.end()));
  return out;
}

template <class T>
std::size_t common(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return both.size();
}

// Pairs of cycles with exactly one common edge; `glued` also requires exactly
// two common vertices.
inline std::uint64_t shared_edge_pairs(const Graph& g, std::size_t k, bool glued) {
  const auto all = cycles(g, k);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (common(all[i].edges, all[j].edges) != 1) continue;
      if (glued && common(all[i].vertices, all[j].vertices) != 2) continue;
      ++total;
    }
  }
  return total;
}

// sigma is in Sigma_0: injective, both cycles present.
inline bool is_injection(const Graph& g, std::size_t k, const std::vector<Vertex>& s) {
  const std::size_t len = 2 * k - 2;
  std::vector<Vertex> sorted(s);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  // First cycle s[0..k-1], closed by s[k-1] s[0].
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (!adjacent(g, s[i], s[i + 1])) return false;
  }
  if (!adjacent(g, s[k - 1], s[0])) return false;
  // Second cycle s[k-1], s[k], ..., s[len-1], s[0].
  for (std::size_t i = k - 1; i + 1 < len; ++i) {
    if (!adjacent(g, s[i], s[i + 1])) return false;
  }
  return adjacent(g, s[len - 1], s[0]);
}

// Calls fn(sigma) for every sigma in Sigma_0 (classes empty) or Sigma.
inline void for_each_injection(const Graph& g, std::size_t k, const std::vector<std::uint32_t>& classes,
                               const std::function<void(const std::vector<Vertex>&)>& fn) {
  const std::size_t n = g.vertex_count();
  const std::size_t len = 2 * k - 2;
  std::vector<Vertex> s(len, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == len) {
      if (is_injection(g, k, s)) fn(s);
      return;
    }
    for (Vertex v = 0; v < n; ++v) {
      if (!classes.empty() && classes[v] != i) continue;
      if (std::find(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(i), v) !=
          s.begin() + static_cast<std::ptrdiff_t>(i)) {
        continue;
      }
      s[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
}

inline std::uint64_t injection_count(const Graph& g, std::size_t k,
                                     const std::vector<std::uint32_t>& classes = {}) {
  std::uint64_t total = 0;
  for_each_injection(g, k, classes, [&](const std::vector<Vertex>&) { ++total; });
  return total;
}

// card S_l(v) for l = 1 .. 2k-2: distinct prefixes of injections in Sigma
// starting at v.
inline std::vector<std::uint64_t> prefix_counts(const Graph& g, std::size_t k,
                                                const std::vector<std::uint32_t>& classes, Vertex v) {
  const std::size_t len = 2 * k - 2;
  std::vector<std::set<std::vector<Vertex>>> prefixes(len);
  for_each_injection(g, k, classes, [&](const std::vector<Vertex>& s) {
    if (s[0] != v) return;
    for (std::size_t l = 1; l <= len; ++l) prefixes[l - 1].insert({s.begin(), s.begin() + static_cast<std::ptrdiff_t>(l)});
  });
  std::vector<std::uint64_t> out(len);
  for (std::size_t l = 0; l < len; ++l) out[l] = prefixes[l].size();
  return out;
}

}  // namespace oracle

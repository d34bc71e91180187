#include "concentra/random_graph.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "concentra/errors.hpp"
#include "concentra/parallel.hpp"
#include "concentra/rng.hpp"

namespace concentra::graph {

std::uint64_t edge_index(Vertex u, Vertex v) {
  if (u == v) throw std::invalid_argument("edge_index: loops are not edges");
  const std::uint64_t hi = std::max(u, v);
  const std::uint64_t lo = std::min(u, v);
  return hi * (hi - 1) / 2 + lo;
}

std::pair<Vertex, Vertex> edge_endpoints(std::uint64_t index) {
  // Largest hi with hi (hi - 1) / 2 <= index.
  auto hi = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(index))) / 2.0);
  while (hi * (hi - 1) / 2 > index) --hi;
  while ((hi + 1) * hi / 2 <= index) ++hi;
  return {static_cast<Vertex>(index - hi * (hi - 1) / 2), static_cast<Vertex>(hi)};
}

// ---------------------------------------------------------------------------
// Graph

Graph::Graph(std::size_t n)
    : n_(n),
      words_((n + 63) / 64),
      presence_((concentra::graph::edge_slots(n) + 63) / 64, 0),
      adjacency_(n * ((n + 63) / 64), 0),
      degrees_(n, 0) {
  if (n > std::numeric_limits<Vertex>::max()) throw std::invalid_argument("graph too large");
}

Graph Graph::complete(std::size_t n) {
  Graph g(n);
  for (Vertex v = 1; v < n; ++v) {
    for (Vertex u = 0; u < v; ++u) g.add_edge(u, v);
  }
  return g;
}

Graph Graph::from_edges(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges) {
  Graph g(n);
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  return g;
}

void Graph::check_vertex(Vertex v) const {
  if (v >= n_) {
    throw std::out_of_range("vertex " + std::to_string(v) + " outside a graph on " +
                            std::to_string(n_) + " vertices");
  }
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  check_vertex(u);
  check_vertex(v);
  if (u == v) return false;
  return (row(u)[v >> 6] >> (v & 63)) & 1U;
}

std::uint32_t Graph::max_degree() const noexcept {
  return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

std::vector<Vertex> Graph::neighbors(Vertex v) const {
  check_vertex(v);
  std::vector<Vertex> out;
  out.reserve(degrees_[v]);
  const auto r = row(v);
  for (std::size_t w = 0; w < words_; ++w) {
    for (std::uint64_t bits = r[w]; bits != 0; bits &= bits - 1) {
      out.push_back(static_cast<Vertex>(w * 64 + std::countr_zero(bits)));
    }
  }
  return out;
}

std::vector<std::pair<Vertex, Vertex>> Graph::edge_list() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  out.reserve(edges_);
  for (std::size_t w = 0; w < presence_.size(); ++w) {
    for (std::uint64_t bits = presence_[w]; bits != 0; bits &= bits - 1) {
      out.push_back(edge_endpoints(w * 64 + std::countr_zero(bits)));
    }
  }
  return out;
}

bool Graph::add_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  const std::uint64_t e = edge_index(u, v);
  if (has_edge_index(e)) return false;
  presence_[e >> 6] |= std::uint64_t{1} << (e & 63);
  adjacency_[u * words_ + (v >> 6)] |= std::uint64_t{1} << (v & 63);
  adjacency_[v * words_ + (u >> 6)] |= std::uint64_t{1} << (u & 63);
  ++degrees_[u];
  ++degrees_[v];
  ++edges_;
  return true;
}

bool Graph::remove_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  const std::uint64_t e = edge_index(u, v);
  if (!has_edge_index(e)) return false;
  presence_[e >> 6] &= ~(std::uint64_t{1} << (e & 63));
  adjacency_[u * words_ + (v >> 6)] &= ~(std::uint64_t{1} << (v & 63));
  adjacency_[v * words_ + (u >> 6)] &= ~(std::uint64_t{1} << (u & 63));
  --degrees_[u];
  --degrees_[v];
  --edges_;
  return true;
}

Graph sample_graph(std::size_t n, double p, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_graph: need n >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_graph: p must lie in [0, 1]");
  Graph g(n);
  std::uint64_t e = 0;
  for (Vertex v = 1; v < n; ++v) {
    for (Vertex u = 0; u < v; ++u, ++e) {
      if (to_unit_interval(counter_hash(seed, 0, e)) < p) g.add_edge(u, v);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Degree buckets

double LogConventions::bucket_ceiling(double np) const {
  return std::floor(std::log(np) / std::log(bucket_ceiling_base) + 1e-12);
}

double LogConventions::loglog(double np) const {
  const double lb = std::log(loglog_base);
  return std::log(std::log(np) / lb) / lb;
}

std::span<const Vertex> DegreeProfile::bucket(int j) const {
  if (j < 1 || j > max_bucket()) return {};
  return buckets[static_cast<std::size_t>(j - 1)];
}

int degree_bucket(double degree, double np) {
  if (degree < 16.0 * np) return 1;
  int j = 2;
  double upper = 32.0 * np;  // 2^{j+3} np
  while (degree >= upper) {
    ++j;
    upper *= 2.0;
  }
  return j;
}

DegreeProfile degree_buckets(const Graph& g, double p) {
  const double np = static_cast<double>(g.vertex_count()) * p;
  if (!(np > 0.0)) throw std::invalid_argument("degree_buckets: need np > 0");
  DegreeProfile profile;
  profile.np = np;
  profile.degrees = g.degrees();
  profile.bucket_of.resize(g.vertex_count());
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const int j = degree_bucket(profile.degrees[v], np);
    profile.bucket_of[v] = j;
    if (static_cast<std::size_t>(j) > profile.buckets.size()) profile.buckets.resize(j);
    profile.buckets[static_cast<std::size_t>(j - 1)].push_back(v);
  }
  if (profile.buckets.empty()) profile.buckets.resize(1);
  return profile;
}

namespace {

void require_guard(double np, const LogConventions& conventions) {
  if (!(np > conventions.guard())) {
    throw PreconditionError("bucket thresholds need np > " + std::to_string(conventions.guard()) +
                            " (got np = " + std::to_string(np) + ")");
  }
}

std::vector<BucketCheck> bucket_checks(const DegreeProfile& profile,
                                       const LogConventions& conventions, int& j_max) {
  const double np = profile.np;
  j_max = static_cast<int>(conventions.bucket_ceiling(np));
  const double ll = conventions.loglog(np);
  std::vector<BucketCheck> checks;
  for (int j = 2; j <= j_max; ++j) {
    const double threshold = np / (j * std::ldexp(1.0, j) * ll);
    checks.push_back({j, profile.bucket(j).size(), threshold});
  }
  return checks;
}

}  // namespace

EventEResult event_E(const Graph& g, double p, const LogConventions& conventions) {
  const double np = static_cast<double>(g.vertex_count()) * p;
  require_guard(np, conventions);
  const DegreeProfile profile = degree_buckets(g, p);
  EventEResult result;
  result.np = np;
  result.max_degree = g.max_degree();
  result.degree_clause = result.max_degree <= np * np;
  result.buckets = bucket_checks(profile, conventions, result.j_max);
  result.bucket_clause = std::all_of(result.buckets.begin(), result.buckets.end(),
                                     [](const BucketCheck& b) { return b.cardinality <= b.threshold; });
  result.holds = result.degree_clause && result.bucket_clause;
  return result;
}

bool lemma1_event(const Graph& g, double p) {
  const double np = static_cast<double>(g.vertex_count()) * p;
  const std::uint32_t d = g.max_degree();
  // The empty graph has no high-degree vertex even when (np)^2 = 0.
  return d > 0 && d >= np * np;
}

bool lemma2_event(const Graph& g, double p, const LogConventions& conventions) {
  const double np = static_cast<double>(g.vertex_count()) * p;
  require_guard(np, conventions);
  int j_max = 0;
  const auto checks = bucket_checks(degree_buckets(g, p), conventions, j_max);
  return std::any_of(checks.begin(), checks.end(), [](const BucketCheck& b) {
    return static_cast<double>(b.cardinality) >= b.threshold;
  });
}

GraphEventSweep sweep_graph_events(std::size_t n, double p, std::size_t trials,
                                   std::uint64_t seed, unsigned threads,
                                   const LogConventions& conventions) {
  const double np = static_cast<double>(n) * p;
  const bool buckets = p == 0.0 || np > conventions.guard();
  struct Outcome {
    bool e = false, l1 = false, l2 = false;
  };
  std::vector<Outcome> outcomes(trials);
  if (p > 0.0) {
    parallel_for(trials, threads, [&](std::size_t i) {
      const Graph g = sample_graph(n, p, derive_seed(seed, i));
      outcomes[i].l1 = lemma1_event(g, p);
      if (buckets) {
        outcomes[i].e = event_E(g, p, conventions).holds;
        outcomes[i].l2 = lemma2_event(g, p, conventions);
      }
    });
  } else {
    for (auto& o : outcomes) o.e = true;
  }
  std::uint64_t e = 0, l1 = 0, l2 = 0;
  for (const auto& o : outcomes) {
    e += o.e;
    l1 += o.l1;
    l2 += o.l2;
  }
  GraphEventSweep sweep;
  sweep.lemma1 = stats::proportion(l1, trials);
  sweep.event_e = stats::proportion(e, buckets ? trials : 0);
  sweep.lemma2 = stats::proportion(l2, buckets ? trials : 0);
  return sweep;
}

LemmaEstimate estimate_lemma1(std::size_t n, double p, std::size_t trials, std::uint64_t seed,
                              unsigned threads) {
  const double np = static_cast<double>(n) * p;
  std::vector<char> hit(trials, 0);
  if (p > 0.0) {
    parallel_for(trials, threads, [&](std::size_t i) {
      hit[i] = lemma1_event(sample_graph(n, p, derive_seed(seed, i)), p);
    });
  }
  const auto count = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
  return {stats::proportion(count, trials), std::exp(-np * np / 2.0)};
}

LemmaEstimate estimate_lemma2(std::size_t n, double p, std::size_t trials, std::uint64_t seed,
                              double c, unsigned threads, const LogConventions& conventions) {
  if (!(c > 0.0)) throw std::invalid_argument("estimate_lemma2: C must be positive");
  const double np = static_cast<double>(n) * p;
  if (p == 0.0) return {stats::proportion(0, trials), 0.0};
  require_guard(np, conventions);
  std::vector<char> hit(trials, 0);
  parallel_for(trials, threads, [&](std::size_t i) {
    hit[i] = lemma2_event(sample_graph(n, p, derive_seed(seed, i)), p, conventions);
  });
  const auto count = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
  return {stats::proportion(count, trials), std::exp(-np * np / (c * conventions.loglog(np)))};
}

// ---------------------------------------------------------------------------
// Edge lists

Graph read_edge_list(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("edge list: missing header");
  const auto header = nlohmann::json::parse(line);
  const auto n = header.at("n").get<std::size_t>();
  Graph g(n);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#' ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream ls(line);
    long long u = -1, v = -1;
    if (!(ls >> u >> v) || u < 0 || v < 0 || static_cast<std::size_t>(u) >= n ||
        static_cast<std::size_t>(v) >= n || u == v) {
      throw std::runtime_error("edge list: bad edge on line " + std::to_string(lineno));
    }
    g.add_edge(static_cast<Vertex>(u), static_cast<Vertex>(v));
  }
  return g;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << nlohmann::json{{"n", g.vertex_count()}}.dump() << '\n';
  for (const auto& [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
}

}  // namespace concentra::graph

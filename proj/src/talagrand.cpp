#include "concentra/talagrand.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "concentra/errors.hpp"

namespace concentra::talagrand {

namespace {

constexpr double kPositive = 1e-12;

void require_verifier_dim(std::size_t dim) {
  cube::require_enumerable(dim, kMaxVerifierDimension);
}

double dot(std::span<const double> x, std::uint64_t g) {
  double sum = 0.0;
  for (std::uint64_t bits = g; bits != 0; bits &= bits - 1) sum += x[std::countr_zero(bits)];
  return sum;
}

double squared_norm(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

// Weights alpha (sum 1) of the point of minimum norm on the affine hull of
// the selected points. Returns nullopt when the points are affinely dependent.
std::optional<Eigen::VectorXd> affine_minimizer(std::span<const std::uint64_t> points,
                                                std::span<const std::size_t> active) {
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      kkt(r, c) = std::popcount(points[active[r]] & points[active[c]]);
    }
    kkt(r, k) = 1.0;
    kkt(k, r) = 1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd solution = lu.solve(rhs);
  return Eigen::VectorXd(solution.head(k));
}

std::vector<double> combine(std::size_t dim, std::span<const std::uint64_t> points,
                            std::span<const std::size_t> active, std::span<const double> weights) {
  std::vector<double> x(dim, 0.0);
  for (std::size_t s = 0; s < active.size(); ++s) {
    for (std::uint64_t bits = points[active[s]]; bits != 0; bits &= bits - 1) {
      x[std::countr_zero(bits)] += weights[s];
    }
  }
  return x;
}

DistanceResult make_result(std::size_t dim, std::span<const std::uint64_t> points,
                           std::span<const std::size_t> active, std::span<const double> weights) {
  DistanceResult result;
  result.generators.assign(points.begin(), points.end());
  result.weights.assign(points.size(), 0.0);
  double total = 0.0;
  for (double w : weights) total += w;
  for (std::size_t s = 0; s < active.size(); ++s) result.weights[active[s]] = weights[s] / total;
  std::vector<double> normalized(weights.size());
  for (std::size_t s = 0; s < weights.size(); ++s) normalized[s] = weights[s] / total;
  result.value = std::sqrt(squared_norm(combine(dim, points, active, normalized)));
  return result;
}

// Generators not dominating any other generator, lightest first.
std::vector<std::size_t> minimal_generators(std::span<const std::uint64_t> gens) {
  std::vector<std::size_t> order(gens.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::popcount(gens[a]) < std::popcount(gens[b]);
  });
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const bool dominated = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return (gens[k] & ~gens[idx]) == 0;
    });
    if (!dominated) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

// ---------------------------------------------------------------------------
// VertexSet

VertexSet::VertexSet(std::size_t dim, std::vector<std::uint64_t> members)
    : dim_(dim), members_(std::move(members)) {
  if (dim > cube::kMaxDimension) throw std::invalid_argument("vertex set dimension too large");
  for (std::uint64_t y : members_) {
    if ((y & ~cube::full_mask(dim)) != 0) {
      throw std::invalid_argument("vertex set member exceeds the dimension");
    }
  }
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

VertexSet::VertexSet(std::size_t dim, std::span<const CubePoint> members) : dim_(dim) {
  for (const CubePoint& y : members) {
    if (y.dim() != dim) throw std::invalid_argument("vertex set member has the wrong dimension");
    members_.push_back(y.bits());
  }
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

VertexSet VertexSet::sublevel(const FunctionTable& z, double level) {
  std::vector<std::uint64_t> members;
  for (std::uint64_t y = 0; y < z.size(); ++y) {
    if (z.at(y) <= level) members.push_back(y);
  }
  return {z.dim(), std::move(members)};
}

bool VertexSet::contains(std::uint64_t x) const {
  return std::binary_search(members_.begin(), members_.end(), x);
}

double VertexSet::probability(const ProductMeasure& mu) const {
  if (mu.dim() != dim_) throw std::invalid_argument("vertex set probability: dimension mismatch");
  double sum = 0.0;
  for (std::uint64_t y : members_) sum += mu.weight(y);
  return sum;
}

GeneratorSet generators(const VertexSet& a, const CubePoint& x) {
  if (a.empty()) throw std::invalid_argument("convex distance to an empty set is undefined");
  if (a.dim() != x.dim()) throw std::invalid_argument("generators: dimension mismatch");
  GeneratorSet gs{a.dim(), {}};
  gs.generators.reserve(a.size());
  for (std::uint64_t y : a.members()) gs.generators.push_back(y ^ x.bits());
  std::sort(gs.generators.begin(), gs.generators.end());
  gs.generators.erase(std::unique(gs.generators.begin(), gs.generators.end()),
                      gs.generators.end());
  return gs;
}

// ---------------------------------------------------------------------------
// Minimum-norm point

double DistanceResult::witness_norm() const {
  std::size_t dim = 0;
  for (std::uint64_t g : generators) dim = std::max<std::size_t>(dim, std::bit_width(g));
  std::vector<double> x(dim, 0.0);
  for (std::size_t s = 0; s < generators.size(); ++s) {
    for (std::uint64_t bits = generators[s]; bits != 0; bits &= bits - 1) {
      x[std::countr_zero(bits)] += weights[s];
    }
  }
  return std::sqrt(squared_norm(x));
}

DistanceResult min_norm_point_exhaustive(std::size_t dim, std::span<const std::uint64_t> points) {
  const std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("min-norm point of an empty set");
  if (n > 20) throw GuardError("exhaustive min-norm search over more than 20 points");
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_active;
  std::vector<double> best_weights;
  std::vector<std::size_t> active;
  for (std::uint64_t subset = 1; subset < (std::uint64_t{1} << n); ++subset) {
    if (static_cast<std::size_t>(std::popcount(subset)) > dim + 1) continue;
    active.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if ((subset >> i) & 1U) active.push_back(i);
    }
    const auto alpha = affine_minimizer(points, active);
    if (!alpha || alpha->minCoeff() < -kPositive) continue;
    std::vector<double> w(alpha->data(), alpha->data() + alpha->size());
    for (double& v : w) v = std::max(v, 0.0);
    const double norm2 = squared_norm(combine(dim, points, active, w));
    if (norm2 < best - 1e-15) {
      best = norm2;
      best_active = active;
      best_weights = w;
    }
  }
  return make_result(dim, points, best_active, best_weights);
}

DistanceResult min_norm_point(std::size_t dim, std::span<const std::uint64_t> points,
                              const SolverOptions& options) {
  const std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("min-norm point of an empty set");

  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::popcount(points[i]) < std::popcount(points[start])) start = i;
  }
  std::vector<std::size_t> active{start};
  std::vector<double> lambda{1.0};
  std::vector<double> x = combine(dim, points, active, lambda);

  const std::size_t cap = std::max<std::size_t>(10, 10 * n * std::max<std::size_t>(dim, 1));
  bool converged = false;
  for (std::size_t iter = 0; iter < cap && !converged;) {
    // Major cycle: the generator most opposed to x, lowest index on ties.
    const double xx = squared_norm(x);
    std::size_t entering = 0;
    double best_dot = dot(x, points[0]);
    for (std::size_t i = 1; i < n; ++i) {
      const double d = dot(x, points[i]);
      if (d < best_dot) {
        best_dot = d;
        entering = i;
      }
    }
    if (xx - best_dot <= options.tolerance ||
        std::find(active.begin(), active.end(), entering) != active.end()) {
      converged = true;
      break;
    }
    active.push_back(entering);
    lambda.push_back(0.0);

    // Minor cycles: move to the affine minimizer, dropping points whose
    // weight reaches zero along the way.
    for (;;) {
      ++iter;
      const auto alpha = affine_minimizer(points, active);
      if (!alpha) {
        // Numerically dependent active set; undo the last addition and stop.
        active.pop_back();
        lambda.pop_back();
        converged = true;
        break;
      }
      if (alpha->minCoeff() > kPositive) {
        lambda.assign(alpha->data(), alpha->data() + alpha->size());
        break;
      }
      double theta = 1.0;
      std::optional<std::size_t> leaving;
      for (std::size_t s = 0; s < active.size(); ++s) {
        const double a = (*alpha)(static_cast<Eigen::Index>(s));
        if (a <= kPositive && lambda[s] - a > 0.0) {
          const double ratio = lambda[s] / (lambda[s] - a);
          if (!leaving || ratio < theta) {
            theta = ratio;
            leaving = s;
          }
        }
      }
      if (!leaving) {
        theta = 0.0;
        leaving = static_cast<std::size_t>(std::min_element(alpha->data(),
                                                            alpha->data() + alpha->size()) -
                                           alpha->data());
      }
      for (std::size_t s = 0; s < active.size(); ++s) {
        lambda[s] = theta * (*alpha)(static_cast<Eigen::Index>(s)) + (1.0 - theta) * lambda[s];
      }
      lambda[*leaving] = 0.0;
      std::vector<std::size_t> kept_active;
      std::vector<double> kept_lambda;
      for (std::size_t s = 0; s < active.size(); ++s) {
        if (lambda[s] > kPositive) {
          kept_active.push_back(active[s]);
          kept_lambda.push_back(lambda[s]);
        }
      }
      active = std::move(kept_active);
      lambda = std::move(kept_lambda);
      const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
      for (double& l : lambda) l /= total;
      if (active.size() == 1) {
        lambda = {1.0};
        break;
      }
    }
    x = combine(dim, points, active, lambda);
  }

  if (!converged) {
    if (n <= options.brute_force_limit) return min_norm_point_exhaustive(dim, points);
    throw ConvergenceError("min-norm point did not converge within " + std::to_string(cap) +
                           " iterations over " + std::to_string(n) + " points");
  }
  return make_result(dim, points, active, lambda);
}

DistanceResult convex_distance(const VertexSet& a, const CubePoint& x,
                               const SolverOptions& options) {
  const GeneratorSet gs = generators(a, x);
  const std::vector<std::size_t> minimal = minimal_generators(gs.generators);
  std::vector<std::uint64_t> reduced;
  reduced.reserve(minimal.size());
  for (std::size_t idx : minimal) reduced.push_back(gs.generators[idx]);
  const DistanceResult inner = min_norm_point(gs.dim, reduced, options);
  DistanceResult result;
  result.value = inner.value;
  result.generators = gs.generators;
  result.weights.assign(gs.generators.size(), 0.0);
  for (std::size_t s = 0; s < minimal.size(); ++s) result.weights[minimal[s]] = inner.weights[s];
  return result;
}

std::vector<double> distance_table(const VertexSet& a, const SolverOptions& options) {
  cube::require_enumerable(a.dim());
  std::vector<double> table(std::size_t{1} << a.dim());
  for (std::uint64_t x = 0; x < table.size(); ++x) {
    table[x] = a.contains(x) ? 0.0 : convex_distance(a, CubePoint(a.dim(), x), options).value;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Reports

void VerificationReport::merge(const VerificationReport& other) {
  if (inequality.empty()) inequality = other.inequality;
  if (other.inequality != inequality) {
    throw std::invalid_argument("cannot merge reports of different inequalities");
  }
  std::vector<double> merged;
  std::merge(grid.begin(), grid.end(), other.grid.begin(), other.grid.end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
               merged.end());
  grid = std::move(merged);
  max_lhs_over_bound = std::max(max_lhs_over_bound, other.max_lhs_over_bound);
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  instances += other.instances;
}

void to_json(nlohmann::json& j, const Violation& v) {
  j = {{"t", v.t}, {"lhs", v.lhs}, {"bound", v.bound}};
  if (v.a) j["a"] = *v.a;
  if (!v.detail.empty()) j["detail"] = v.detail;
}

void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = {{"inequality", r.inequality},
       {"grid", r.grid},
       {"max_lhs_over_bound", r.max_lhs_over_bound},
       {"violations", r.violations},
       {"instances", r.instances}};
}

std::vector<double> default_t_grid() { return {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}; }

namespace {

// Sorted distinct values, merging anything within `tol`.
std::vector<double> distinct_values(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end(),
                           [tol](double a, double b) { return std::abs(a - b) <= tol; }),
               values.end());
  return values;
}

// Probability mass of {v >= threshold} for weighted values sorted ascending,
// using suffix sums.
class UpperTail {
 public:
  UpperTail(std::span<const double> values, std::span<const double> weights) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    sorted_.reserve(values.size());
    for (std::size_t idx : order) sorted_.push_back(values[idx]);
    suffix_.assign(values.size() + 1, 0.0);
    for (std::size_t r = values.size(); r-- > 0;) suffix_[r] = suffix_[r + 1] + weights[order[r]];
  }

  double at_least(double threshold) const {
    const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), threshold);
    return suffix_[static_cast<std::size_t>(it - sorted_.begin())];
  }
  double at_most(double threshold) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), threshold);
    return suffix_[0] - suffix_[static_cast<std::size_t>(it - sorted_.begin())];
  }

 private:
  std::vector<double> sorted_;
  std::vector<double> suffix_;
};

std::vector<double> vertex_weights(const ProductMeasure& mu) {
  std::vector<double> w(std::size_t{1} << mu.dim());
  for (std::uint64_t x = 0; x < w.size(); ++x) w[x] = mu.weight(x);
  return w;
}

bool exceeds(double lhs, double bound) { return lhs > bound * (1.0 + 1e-12); }

}  // namespace

VerificationReport verify_T1(const VertexSet& a, const ProductMeasure& mu,
                             std::span<const double> distances) {
  require_verifier_dim(a.dim());
  if (mu.dim() != a.dim()) throw std::invalid_argument("verify_T1: dimension mismatch");
  if (a.empty()) throw std::invalid_argument("verify_T1: empty set");
  std::vector<double> computed;
  if (distances.empty()) {
    computed = distance_table(a);
    distances = computed;
  }
  if (distances.size() != (std::size_t{1} << a.dim())) {
    throw std::invalid_argument("verify_T1: distance table has the wrong size");
  }
  constexpr double kTol = 1e-9;
  std::vector<double> squared(distances.size());
  std::transform(distances.begin(), distances.end(), squared.begin(),
                 [](double d) { return d * d; });
  const std::vector<double> weights = vertex_weights(mu);
  const UpperTail tail(squared, weights);
  const double prob_a = a.probability(mu);

  std::vector<double> grid = default_t_grid();
  grid.insert(grid.end(), squared.begin(), squared.end());
  VerificationReport report{"T1", distinct_values(std::move(grid), kTol), 0.0, {}, 1};
  for (double t : report.grid) {
    const double lhs = prob_a * tail.at_least(t - kTol);
    const double bound = std::exp(-t / 2.0);
    report.max_lhs_over_bound = std::max(report.max_lhs_over_bound, lhs / bound);
    if (exceeds(lhs, bound)) report.violations.push_back({t, std::nullopt, lhs, bound, {}});
  }
  return report;
}

T2Check verify_T2(const VertexSet& a, const CubePoint& x, std::span<const double> lambda,
                  std::optional<double> distance) {
  if (a.empty()) throw std::invalid_argument("verify_T2: empty set");
  if (a.dim() != x.dim() || lambda.size() != x.dim()) {
    throw std::invalid_argument("verify_T2: dimension mismatch");
  }
  double norm2 = 0.0;
  for (double l : lambda) {
    if (!std::isfinite(l) || l < 0.0) throw std::invalid_argument("verify_T2: weights must be >= 0");
    norm2 += l * l;
  }
  const double fc = distance ? *distance : convex_distance(a, x).value;
  T2Check check;
  check.bound = fc * std::sqrt(norm2);
  check.lhs = std::numeric_limits<double>::infinity();
  for (std::uint64_t y : a.members()) {
    const double weighted = dot(lambda, y ^ x.bits());
    if (weighted < check.lhs) {
      check.lhs = weighted;
      check.witness = CubePoint(a.dim(), y);
    }
  }
  check.ok = check.lhs <= check.bound + 1e-9 * std::max(1.0, check.bound);
  if (!check.ok) check.witness.reset();
  return check;
}

VerificationReport verify_theorem1(const FunctionTable& z, const ProductMeasure& mu,
                                   const Theorem1Options& options) {
  require_verifier_dim(z.dim());
  if (mu.dim() != z.dim()) throw std::invalid_argument("verify_theorem1: dimension mismatch");
  if (options.require_monotone) {
    const auto check = cube::check_monotone(z);
    if (!check.ok()) {
      throw PreconditionError("theorem 1 needs a monotone function: " +
                              check.violation->describe());
    }
  }
  double scale = 1.0;
  for (double v : z.values()) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * scale;

  const std::vector<double> weights = vertex_weights(mu);
  const UpperTail below(z.values(), weights);
  const std::vector<double> a_grid =
      options.a_grid.empty() ? distinct_values({z.values().begin(), z.values().end()}, 0.0)
                             : options.a_grid;
  const std::vector<double> t_grid = options.t_grid.empty() ? default_t_grid() : options.t_grid;

  std::vector<double> variance(z.size());
  for (std::uint64_t x = 0; x < z.size(); ++x) variance[x] = cube::local_variance(z, x);

  std::vector<std::uint64_t> by_value(z.size());
  std::iota(by_value.begin(), by_value.end(), std::uint64_t{0});
  std::stable_sort(by_value.begin(), by_value.end(),
                   [&](std::uint64_t x, std::uint64_t y) { return z.at(x) < z.at(y); });

  VerificationReport report{"theorem1", t_grid, 0.0, {}, 1};
  std::vector<double> shifted(z.size());
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw std::invalid_argument("verify_theorem1: t must be >= 0");
    // Z(x) >= a + sqrt(V(x) t)  <=>  Z(x) - sqrt(V(x) t) >= a.
    for (std::uint64_t x = 0; x < z.size(); ++x) {
      shifted[x] = z.at(x) - std::sqrt(variance[x] * t);
    }
    const UpperTail deviation(shifted, weights);
    const double bound = std::exp(-t / 2.0);
    for (double a : a_grid) {
      double upper = deviation.at_least(a - tol);
      if (options.strict_exceedance) {
        // Remove the points with Z(x) = a that pass the shifted test.
        const auto first = std::lower_bound(by_value.begin(), by_value.end(), a - tol,
                                            [&](std::uint64_t x, double v) { return z.at(x) < v; });
        for (auto it = first; it != by_value.end() && z.at(*it) <= a + tol; ++it) {
          if (shifted[*it] >= a - tol) upper -= weights[*it];
        }
        upper = std::max(upper, 0.0);
      }
      const double lhs = upper * below.at_most(a + tol);
      report.max_lhs_over_bound = std::max(report.max_lhs_over_bound, lhs / bound);
      if (exceeds(lhs, bound)) report.violations.push_back({t, a, lhs, bound, {}});
    }
  }
  return report;
}

VerificationReport verify_theorem1(const MultilinearFunction& f, const ProductMeasure& mu,
                                   const Theorem1Options& options) {
  require_verifier_dim(f.dim());
  return verify_theorem1(FunctionTable::from(f), mu, options);
}

namespace {

ProofChainReport proof_chain(std::size_t m, const std::function<double(std::uint64_t)>& z,
                             std::uint64_t x, std::uint64_t y, double a) {
  double scale = std::max({1.0, std::abs(z(x)), std::abs(z(y)), std::abs(a)});
  const double tol = 1e-9 * scale;
  if (z(y) > a + tol) {
    throw PreconditionError("proof chain needs Z(y) <= a");
  }
  auto derivative = [&](std::uint64_t point, std::size_t i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    return (point & bit) ? z(point) - z(point & ~bit) : 0.0;
  };

  ProofChainReport report;
  report.lowered = x & ~y;
  report.raised = ~x & y & cube::full_mask(m);
  report.unchanged = ~(x ^ y) & cube::full_mask(m);
  report.gap = z(x) - a;
  // Lowered coordinates first, then raised ones, so every lowering step starts
  // from a point below x.
  std::vector<std::size_t> order;
  for (std::uint64_t group : {report.lowered, report.raised, report.unchanged}) {
    for (std::size_t i = 0; i < m; ++i) {
      if ((group >> i) & 1U) order.push_back(i);
    }
  }
  bool all_ok = true;
  std::uint64_t prev = x;  // z^{i-1}: y on the coordinates walked so far, x elsewhere
  for (std::size_t i : order) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    const std::uint64_t next = (prev & ~bit) | (y & bit);
    ProofStep step;
    step.coordinate = i;
    step.decrement = z(prev) - z(next);
    step.derivative = derivative(prev, i);
    step.bound = derivative(x, i);
    if (report.lowered & bit) {
      step.kind = StepKind::kLowered;
      step.ok = std::abs(step.decrement - step.derivative) <= tol &&
                step.derivative <= step.bound + tol;
      report.weighted_distance += step.bound;
    } else if (report.raised & bit) {
      step.kind = StepKind::kRaised;
      step.ok = step.decrement <= tol && step.bound >= -tol;
      report.weighted_distance += step.bound;
    } else {
      step.kind = StepKind::kUnchanged;
      step.ok = std::abs(step.decrement) <= tol;
    }
    all_ok = all_ok && step.ok;
    report.steps.push_back(step);
    prev = next;
  }
  report.ok = all_ok && report.gap <= report.weighted_distance + tol;
  return report;
}

}  // namespace

ProofChainReport verify_proof_chain(const MultilinearFunction& f, const CubePoint& x,
                                    const CubePoint& y, double a) {
  if (x.dim() != f.dim() || y.dim() != f.dim()) {
    throw std::invalid_argument("verify_proof_chain: dimension mismatch");
  }
  return proof_chain(f.dim(), [&f](std::uint64_t v) { return f.value_at(v); }, x.bits(), y.bits(),
                     a);
}

ProofChainReport verify_proof_chain(const FunctionTable& z, const CubePoint& x, const CubePoint& y,
                                    double a) {
  if (x.dim() != z.dim() || y.dim() != z.dim()) {
    throw std::invalid_argument("verify_proof_chain: dimension mismatch");
  }
  return proof_chain(z.dim(), [&z](std::uint64_t v) { return z.at(v); }, x.bits(), y.bits(), a);
}

VerificationReport verify_bobkov(const FunctionTable& f, const ProductMeasure& mu,
                                 std::span<const double> t_grid) {
  require_verifier_dim(f.dim());
  if (mu.dim() != f.dim()) throw std::invalid_argument("verify_bobkov: dimension mismatch");
  const std::vector<double> grid =
      t_grid.empty() ? default_t_grid() : std::vector<double>(t_grid.begin(), t_grid.end());
  const double mean = cube::expectation(f, mu);
  const double norm = cube::global_discrete_norm(f);
  double scale = 1.0;
  for (double v : f.values()) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * scale;

  VerificationReport report{"bobkov", grid, 0.0, {}, 1};
  for (double t : grid) {
    if (!(t >= 0.0)) throw std::invalid_argument("verify_bobkov: t must be >= 0");
    const double threshold = mean + norm * std::sqrt(t);
    // Only strictly positive deviations count, so a constant f has no tail.
    double lhs = 0.0;
    for (std::uint64_t x = 0; x < f.size(); ++x) {
      const double v = f.at(x);
      if (v >= threshold - tol && v - mean > tol) lhs += mu.weight(x);
    }
    const double bound = std::exp(-t / 4.0);
    report.max_lhs_over_bound = std::max(report.max_lhs_over_bound, lhs / bound);
    if (exceeds(lhs, bound)) report.violations.push_back({t, std::nullopt, lhs, bound, {}});
  }
  return report;
}

}  // namespace concentra::talagrand

#pragma once

// Talagrand's convex-hull distance on {0,1}^m and exhaustive verifiers for
// the inequalities built on it.
//
// For a set A and a point x, U_A(x) is the set of 0/1 vectors s such that
// some y in A agrees with x wherever s_i = 0, and
//
//     f_c(A, x) = min { |s| : s in conv U_A(x) }.
//
// Every s in U_A(x) dominates, coordinatewise, the disagreement pattern
// h(y) = (1{y_i != x_i})_i of some y in A, and h(y) itself lies in U_A(x).
// Replacing each vertex of a convex combination by a dominated vector never
// increases the Euclidean norm of the combination (all entries are >= 0), so
// the minimum over conv U_A(x) equals the minimum over conv {h(y) : y in A}.
// The same argument lets the solver discard generators that dominate other
// generators before it starts.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "concentra/cube_core.hpp"

namespace concentra::talagrand {

using cube::CubePoint;
using cube::FunctionTable;
using cube::MultilinearFunction;
using cube::ProductMeasure;

inline constexpr std::size_t kMaxVerifierDimension = 14;

class VertexSet {
 public:
  VertexSet(std::size_t dim, std::vector<std::uint64_t> members);
  VertexSet(std::size_t dim, std::span<const CubePoint> members);

  // {y : z(y) <= level}, the sets used by the self-normalized inequality.
  static VertexSet sublevel(const FunctionTable& z, double level);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  // Sorted, duplicate-free vertex masks.
  const std::vector<std::uint64_t>& members() const noexcept { return members_; }
  bool contains(std::uint64_t x) const;

  double probability(const ProductMeasure& mu) const;

 private:
  std::size_t dim_;
  std::vector<std::uint64_t> members_;
};

struct GeneratorSet {
  std::size_t dim = 0;
  std::vector<std::uint64_t> generators;  // sorted, duplicate-free

  bool contains_zero() const noexcept { return !generators.empty() && generators.front() == 0; }
};

// { h(y) : y in A }. Throws std::invalid_argument for an empty set.
GeneratorSet generators(const VertexSet& a, const CubePoint& x);

struct DistanceResult {
  double value = 0.0;
  // Convex-combination weights aligned with `generators`; nonnegative, sum 1.
  std::vector<std::uint64_t> generators;
  std::vector<double> weights;

  // Euclidean norm of sum_g w_g g, recomputed from the witness.
  double witness_norm() const;
};

struct SolverOptions {
  double tolerance = 1e-9;
  // Generator sets at most this large fall back to exhaustive face search if
  // the iterative solver stalls or hits its cap.
  std::size_t brute_force_limit = 12;
};

// Minimum Euclidean norm over the convex hull of 0/1 vectors (bit masks in
// R^dim), by Wolfe's active-set minimum-norm-point iteration with
// lowest-index tie-breaking. Iteration cap 10 * |points| * dim.
DistanceResult min_norm_point(std::size_t dim, std::span<const std::uint64_t> points,
                              const SolverOptions& options = {});

// Exhaustive search over affinely independent faces; exact for small inputs.
DistanceResult min_norm_point_exhaustive(std::size_t dim, std::span<const std::uint64_t> points);

// f_c(A, x). Zero iff x is in A.
DistanceResult convex_distance(const VertexSet& a, const CubePoint& x,
                               const SolverOptions& options = {});

// f_c(A, x) for every vertex x, indexed by mask.
std::vector<double> distance_table(const VertexSet& a, const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Verifier reports

struct Violation {
  double t = 0.0;
  std::optional<double> a;
  double lhs = 0.0;
  double bound = 0.0;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct VerificationReport {
  std::string inequality;
  std::vector<double> grid;
  double max_lhs_over_bound = 0.0;
  std::vector<Violation> violations;
  std::size_t instances = 1;

  bool passed() const noexcept { return violations.empty(); }
  // Folds another instance of the same inequality into this report: grids are
  // unioned, the ratio maximized, violations appended.
  void merge(const VerificationReport& other);

  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

// {"inequality": string, "grid": [...], "max_lhs_over_bound": number, "violations": [...]}
void to_json(nlohmann::json& j, const VerificationReport& r);
void to_json(nlohmann::json& j, const Violation& v);

std::vector<double> default_t_grid();

// P(A) * P(f_c^2 >= t) <= exp(-t/2) for every t in the default grid and every
// attained value of f_c^2. Requires dim <= kMaxVerifierDimension.
VerificationReport verify_T1(const VertexSet& a, const ProductMeasure& mu,
                             std::span<const double> distances = {});

struct T2Check {
  bool ok = false;
  std::optional<CubePoint> witness;  // y minimizing sum_i lambda_i 1{y_i != x_i}
  double lhs = 0.0;
  double bound = 0.0;  // f_c(A, x) * |lambda|
};

// Looks for y in A with sum_i lambda_i 1{y_i != x_i} <= f_c(A, x) |lambda|.
// `distance` may carry a precomputed f_c(A, x).
T2Check verify_T2(const VertexSet& a, const CubePoint& x, std::span<const double> lambda,
                  std::optional<double> distance = std::nullopt);

struct Theorem1Options {
  // Empty: all attained values of Z.
  std::vector<double> a_grid;
  // Empty: default_t_grid().
  std::vector<double> t_grid;
  bool require_monotone = true;
  // Count only points with Z(x) > a in the deviation event. With the
  // non-strict reading, every x with Z(x) = a and V(x) = 0 belongs to the
  // event for all t, so a constant Z gives lhs = 1.
  bool strict_exceedance = true;
};

// P(Z(x) >= a + sqrt(V(x) t), Z(x) > a) * P(Z <= a) <= exp(-t/2) over the
// (a, t) grid.
// Throws PreconditionError if `require_monotone` and Z or some V_i is not
// non-decreasing.
VerificationReport verify_theorem1(const FunctionTable& z, const ProductMeasure& mu,
                                   const Theorem1Options& options = {});
VerificationReport verify_theorem1(const MultilinearFunction& f, const ProductMeasure& mu,
                                   const Theorem1Options& options = {});

enum class StepKind { kUnchanged, kRaised, kLowered };  // i in I3, I2, I1

struct ProofStep {
  std::size_t coordinate = 0;
  StepKind kind = StepKind::kUnchanged;
  double decrement = 0.0;   // Z(z^{i-1}) - Z(z^i)
  double derivative = 0.0;  // V_i(z^{i-1})
  double bound = 0.0;       // V_i(x)
  bool ok = false;
};

struct ProofChainReport {
  std::uint64_t lowered = 0;    // I1: x_i = 1, y_i = 0
  std::uint64_t raised = 0;     // I2: x_i = 0, y_i = 1
  std::uint64_t unchanged = 0;  // I3: x_i = y_i
  std::vector<ProofStep> steps;
  double gap = 0.0;             // Z(x) - a
  double weighted_distance = 0.0;  // sum_i V_i(x) 1{x_i != y_i}
  bool ok = false;
};

// Walks from z^0 = x to y one coordinate at a time, lowered coordinates (I1)
// before raised ones (I2), checking every step against V_i(x), then
// Z(x) - a <= sum_i V_i(x) 1{x_i != y_i}.
// Throws PreconditionError if Z(y) > a.
ProofChainReport verify_proof_chain(const MultilinearFunction& f, const CubePoint& x,
                                    const CubePoint& y, double a);
ProofChainReport verify_proof_chain(const FunctionTable& z, const CubePoint& x, const CubePoint& y,
                                    double a);

// P(f >= E f + |f|_d sqrt(t)) <= exp(-t/4) for every t in the grid.
VerificationReport verify_bobkov(const FunctionTable& f, const ProductMeasure& mu,
                                 std::span<const double> t_grid = {});

}  // namespace concentra::talagrand

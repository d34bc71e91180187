#pragma once

// Functions on the discrete cube {0,1}^m under the product Bernoulli(p) measure.
//
// Points are bit vectors packed into a 64-bit word (coordinate i is bit i,
// coordinates are 0-based in this API). Multilinear functions with
// nonnegative coefficients,
//
//     Z(x) = sum_C alpha_C * prod_{i in C} x_i,
//
// are stored sparsely as a subset-mask -> weight map. Anything that needs the
// whole cube (tables, expectations over a table, medians, monotonicity
// checks) is guarded by kMaxEnumerationDimension.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace concentra::cube {

inline constexpr std::size_t kMaxDimension = 64;
inline constexpr std::size_t kMaxEnumerationDimension = 24;

// Mask with the low `dim` bits set.
constexpr std::uint64_t full_mask(std::size_t dim) noexcept {
  return dim >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << dim) - 1;
}

// Throws GuardError when 2^dim vertices cannot be enumerated.
void require_enumerable(std::size_t dim, std::size_t limit = kMaxEnumerationDimension);

class CubePoint {
 public:
  CubePoint() = default;
  CubePoint(std::size_t dim, std::uint64_t bits);

  static CubePoint zeros(std::size_t dim) { return {dim, 0}; }
  static CubePoint ones(std::size_t dim) { return {dim, full_mask(dim)}; }
  // From explicit 0/1 coordinates, x_0 first.
  static CubePoint from_coordinates(std::span<const int> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t bits() const noexcept { return bits_; }
  bool operator[](std::size_t i) const noexcept { return (bits_ >> i) & 1U; }
  bool at(std::size_t i) const;  // bounds-checked
  std::size_t weight() const noexcept;

  CubePoint with(std::size_t i, bool value) const;
  CubePoint flipped(std::size_t i) const;
  CubePoint complement() const { return {dim_, ~bits_ & full_mask(dim_)}; }

  std::string to_string() const;  // "0110", x_0 first

  friend bool operator==(const CubePoint&, const CubePoint&) = default;
  friend auto operator<=>(const CubePoint&, const CubePoint&) = default;

 private:
  std::size_t dim_ = 0;
  std::uint64_t bits_ = 0;
};

// mu_p^m: every coordinate is 1 independently with probability p.
class ProductMeasure {
 public:
  ProductMeasure(double p, std::size_t dim);

  double p() const noexcept { return p_; }
  std::size_t dim() const noexcept { return dim_; }

  double weight(std::uint64_t bits) const noexcept;
  double weight(const CubePoint& x) const noexcept { return weight(x.bits()); }

 private:
  double p_;
  std::size_t dim_;
  std::vector<double> by_popcount_;
};

class MultilinearFunction {
 public:
  using Terms = std::map<std::uint64_t, double>;

  explicit MultilinearFunction(std::size_t dim);
  MultilinearFunction(std::size_t dim, Terms terms);

  // Adds `weight` to alpha_subset. Weights must be finite and >= 0.
  MultilinearFunction& add_term(std::uint64_t subset, double weight);

  std::size_t dim() const noexcept { return dim_; }
  const Terms& terms() const noexcept { return terms_; }
  // True when every coefficient is an integer; such functions are evaluated
  // in 64-bit integer arithmetic.
  bool is_integral() const noexcept { return integral_; }

  // Unchecked hot-path evaluation at a raw mask.
  double value_at(std::uint64_t bits) const noexcept;
  std::int64_t exact_value_at(std::uint64_t bits) const noexcept;

  friend bool operator==(const MultilinearFunction&, const MultilinearFunction&) = default;

 private:
  std::size_t dim_;
  Terms terms_;
  std::size_t fractional_terms_ = 0;
  bool integral_ = true;
};

// Arbitrary Z: {0,1}^m -> R given by all 2^m values, indexed by the vertex mask.
class FunctionTable {
 public:
  FunctionTable(std::size_t dim, std::vector<double> values);

  // Tabulates f by a subset-sum (zeta) transform of its coefficients.
  static FunctionTable from(const MultilinearFunction& f);
  static FunctionTable from(std::size_t dim, const std::function<double(std::uint64_t)>& z);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double at(std::uint64_t bits) const noexcept { return values_[bits]; }
  double operator()(const CubePoint& x) const;

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

double evaluate(const MultilinearFunction& f, const CubePoint& x);
// V_i(x) = Z(x) - Z(x with coordinate i set to 0).
double discrete_derivative(const MultilinearFunction& f, const CubePoint& x, std::size_t i);
// V(x) = sum_i V_i(x)^2.
double local_variance(const MultilinearFunction& f, const CubePoint& x);

// Integer-arithmetic variants; throw std::domain_error unless f.is_integral().
std::int64_t evaluate_exact(const MultilinearFunction& f, const CubePoint& x);
std::int64_t discrete_derivative_exact(const MultilinearFunction& f, const CubePoint& x,
                                       std::size_t i);
std::int64_t local_variance_exact(const MultilinearFunction& f, const CubePoint& x);

double discrete_derivative(const FunctionTable& z, std::uint64_t x, std::size_t i);
double local_variance(const FunctionTable& z, std::uint64_t x);

struct MonotoneViolation {
  CubePoint lower;             // has coordinate `coordinate` equal to 0
  std::size_t coordinate = 0;  // flipping it 0 -> 1 decreases `quantity`
  // nullopt: Z itself decreased; otherwise the index j of the V_j that did.
  std::optional<std::size_t> derivative;
  double before = 0.0;
  double after = 0.0;

  std::string describe() const;
};

struct MonotoneCheck {
  std::optional<MonotoneViolation> violation;
  bool ok() const noexcept { return !violation.has_value(); }
};

// Checks that Z and every V_j are non-decreasing in each coordinate over the
// whole cube, returning the first counterexample in (x, i, quantity) order.
// Decreases smaller than 1e-12 * max|Z| are treated as rounding.
MonotoneCheck check_monotone(const FunctionTable& z);
MonotoneCheck check_monotone(const MultilinearFunction& f);

// sup_x ( sum_i (f(x) - f(x^i))^2 )^{1/2}, x^i = x with coordinate i flipped.
double global_discrete_norm(const FunctionTable& f);

double expectation(const FunctionTable& z, const ProductMeasure& mu);
// Closed form sum_C alpha_C p^{|C|}; needs no enumeration.
double expectation(const MultilinearFunction& f, const ProductMeasure& mu);

double probability(const FunctionTable& z, const ProductMeasure& mu,
                   const std::function<bool(double)>& predicate);
// P(Z >= threshold).
double tail_probability(const FunctionTable& z, double threshold, const ProductMeasure& mu);
// Lower median inf{a : P(Z <= a) >= 1/2}.
double median(const FunctionTable& z, const ProductMeasure& mu);

// Lower median of a weighted sample: smallest value whose cumulative weight
// reaches half the total. Weights must be nonnegative with positive sum.
double lower_median(std::span<const double> values, std::span<const double> weights);

// JSON: {"m": int, "terms": [{"subset": [int...], "weight": number}...]}, 1-based.
void to_json(nlohmann::json& j, const MultilinearFunction& f);
MultilinearFunction multilinear_from_json(const nlohmann::json& j);

// JSON: {"m": int, "values": [number...]} with values[x] at vertex mask x.
void to_json(nlohmann::json& j, const FunctionTable& t);
FunctionTable table_from_json(const nlohmann::json& j);

}  // namespace concentra::cube

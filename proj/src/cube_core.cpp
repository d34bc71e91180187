#include "concentra/cube_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "concentra/errors.hpp"

namespace concentra::cube {

namespace {

void require_dimension(std::size_t dim) {
  if (dim > kMaxDimension) {
    throw std::invalid_argument("cube dimension " + std::to_string(dim) + " exceeds " +
                                std::to_string(kMaxDimension));
  }
}

void require_same_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(expected) + " vs " + std::to_string(got) + ")");
  }
}

void require_coordinate(std::size_t dim, std::size_t i) {
  if (i >= dim) {
    throw std::out_of_range("coordinate " + std::to_string(i) + " out of range for dimension " +
                            std::to_string(dim));
  }
}

void require_integral(const MultilinearFunction& f) {
  if (!f.is_integral()) throw std::domain_error("exact arithmetic needs integer coefficients");
}

}  // namespace

void require_enumerable(std::size_t dim, std::size_t limit) {
  if (dim > std::min(limit, kMaxEnumerationDimension)) {
    throw GuardError("enumeration of 2^" + std::to_string(dim) + " vertices exceeds the limit 2^" +
                     std::to_string(std::min(limit, kMaxEnumerationDimension)));
  }
}

// ---------------------------------------------------------------------------
// CubePoint

CubePoint::CubePoint(std::size_t dim, std::uint64_t bits) : dim_(dim), bits_(bits) {
  require_dimension(dim);
  if ((bits & ~full_mask(dim)) != 0) {
    throw std::invalid_argument("cube point has bits beyond its dimension");
  }
}

CubePoint CubePoint::from_coordinates(std::span<const int> coords) {
  require_dimension(coords.size());
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] != 0 && coords[i] != 1) throw std::invalid_argument("coordinate must be 0 or 1");
    if (coords[i] == 1) bits |= std::uint64_t{1} << i;
  }
  return {coords.size(), bits};
}

bool CubePoint::at(std::size_t i) const {
  require_coordinate(dim_, i);
  return (*this)[i];
}

std::size_t CubePoint::weight() const noexcept { return std::popcount(bits_); }

CubePoint CubePoint::with(std::size_t i, bool value) const {
  require_coordinate(dim_, i);
  const std::uint64_t bit = std::uint64_t{1} << i;
  return {dim_, value ? (bits_ | bit) : (bits_ & ~bit)};
}

CubePoint CubePoint::flipped(std::size_t i) const {
  require_coordinate(dim_, i);
  return {dim_, bits_ ^ (std::uint64_t{1} << i)};
}

std::string CubePoint::to_string() const {
  std::string s(dim_, '0');
  for (std::size_t i = 0; i < dim_; ++i) {
    if ((*this)[i]) s[i] = '1';
  }
  return s;
}

// ---------------------------------------------------------------------------
// ProductMeasure

ProductMeasure::ProductMeasure(double p, std::size_t dim) : p_(p), dim_(dim) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("measure: p must lie in [0, 1]");
  require_dimension(dim);
  by_popcount_.resize(dim + 1);
  for (std::size_t w = 0; w <= dim; ++w) {
    by_popcount_[w] = std::pow(p, static_cast<double>(w)) *
                      std::pow(1.0 - p, static_cast<double>(dim - w));
  }
}

double ProductMeasure::weight(std::uint64_t bits) const noexcept {
  return by_popcount_[std::popcount(bits)];
}

// ---------------------------------------------------------------------------
// MultilinearFunction

MultilinearFunction::MultilinearFunction(std::size_t dim) : dim_(dim) { require_dimension(dim); }

MultilinearFunction::MultilinearFunction(std::size_t dim, Terms terms) : MultilinearFunction(dim) {
  for (const auto& [subset, weight] : terms) add_term(subset, weight);
}

MultilinearFunction& MultilinearFunction::add_term(std::uint64_t subset, double weight) {
  if ((subset & ~full_mask(dim_)) != 0) {
    throw std::invalid_argument("monomial subset exceeds the dimension");
  }
  if (!std::isfinite(weight) || weight < 0.0) {
    throw std::invalid_argument("monomial weights must be finite and nonnegative");
  }
  if (weight == 0.0) return *this;
  auto is_int = [](double v) { return std::trunc(v) == v && v < 0x1.0p53; };
  double& slot = terms_[subset];
  if (slot != 0.0 && !is_int(slot)) --fractional_terms_;
  slot += weight;
  if (!is_int(slot)) ++fractional_terms_;
  integral_ = fractional_terms_ == 0;
  return *this;
}

double MultilinearFunction::value_at(std::uint64_t bits) const noexcept {
  if (integral_) return static_cast<double>(exact_value_at(bits));
  double sum = 0.0;
  for (const auto& [subset, weight] : terms_) {
    if ((subset & ~bits) == 0) sum += weight;
  }
  return sum;
}

std::int64_t MultilinearFunction::exact_value_at(std::uint64_t bits) const noexcept {
  std::int64_t sum = 0;
  for (const auto& [subset, weight] : terms_) {
    if ((subset & ~bits) == 0) sum += static_cast<std::int64_t>(weight);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// FunctionTable

FunctionTable::FunctionTable(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  require_enumerable(dim);
  if (values_.size() != (std::size_t{1} << dim)) {
    throw std::invalid_argument("function table needs exactly 2^m values");
  }
}

FunctionTable FunctionTable::from(const MultilinearFunction& f) {
  require_enumerable(f.dim());
  const std::size_t size = std::size_t{1} << f.dim();
  std::vector<double> values(size, 0.0);
  if (f.is_integral()) {
    std::vector<std::int64_t> exact(size, 0);
    for (const auto& [subset, weight] : f.terms()) exact[subset] += static_cast<std::int64_t>(weight);
    for (std::size_t i = 0; i < f.dim(); ++i) {
      const std::size_t bit = std::size_t{1} << i;
      for (std::size_t x = 0; x < size; ++x) {
        if (x & bit) exact[x] += exact[x ^ bit];
      }
    }
    std::transform(exact.begin(), exact.end(), values.begin(),
                   [](std::int64_t v) { return static_cast<double>(v); });
  } else {
    for (const auto& [subset, weight] : f.terms()) values[subset] += weight;
    for (std::size_t i = 0; i < f.dim(); ++i) {
      const std::size_t bit = std::size_t{1} << i;
      for (std::size_t x = 0; x < size; ++x) {
        if (x & bit) values[x] += values[x ^ bit];
      }
    }
  }
  return {f.dim(), std::move(values)};
}

FunctionTable FunctionTable::from(std::size_t dim, const std::function<double(std::uint64_t)>& z) {
  require_enumerable(dim);
  std::vector<double> values(std::size_t{1} << dim);
  for (std::size_t x = 0; x < values.size(); ++x) values[x] = z(x);
  return {dim, std::move(values)};
}

double FunctionTable::operator()(const CubePoint& x) const {
  require_same_dim(dim_, x.dim(), "table lookup");
  return values_[x.bits()];
}

// ---------------------------------------------------------------------------
// Derivatives

double evaluate(const MultilinearFunction& f, const CubePoint& x) {
  require_same_dim(f.dim(), x.dim(), "evaluate");
  return f.value_at(x.bits());
}

double discrete_derivative(const MultilinearFunction& f, const CubePoint& x, std::size_t i) {
  require_same_dim(f.dim(), x.dim(), "discrete_derivative");
  require_coordinate(f.dim(), i);
  if (f.is_integral()) return static_cast<double>(discrete_derivative_exact(f, x, i));
  if (!x[i]) return 0.0;
  // Only monomials containing i change when x_i drops to 0.
  const std::uint64_t bit = std::uint64_t{1} << i;
  double sum = 0.0;
  for (const auto& [subset, weight] : f.terms()) {
    if ((subset & bit) && (subset & ~x.bits()) == 0) sum += weight;
  }
  return sum;
}

double local_variance(const MultilinearFunction& f, const CubePoint& x) {
  require_same_dim(f.dim(), x.dim(), "local_variance");
  if (f.is_integral()) return static_cast<double>(local_variance_exact(f, x));
  double v = 0.0;
  for (std::size_t i = 0; i < f.dim(); ++i) {
    const double d = discrete_derivative(f, x, i);
    v += d * d;
  }
  return v;
}

std::int64_t evaluate_exact(const MultilinearFunction& f, const CubePoint& x) {
  require_same_dim(f.dim(), x.dim(), "evaluate_exact");
  require_integral(f);
  return f.exact_value_at(x.bits());
}

std::int64_t discrete_derivative_exact(const MultilinearFunction& f, const CubePoint& x,
                                       std::size_t i) {
  require_same_dim(f.dim(), x.dim(), "discrete_derivative_exact");
  require_coordinate(f.dim(), i);
  require_integral(f);
  if (!x[i]) return 0;
  const std::uint64_t bit = std::uint64_t{1} << i;
  std::int64_t sum = 0;
  for (const auto& [subset, weight] : f.terms()) {
    if ((subset & bit) && (subset & ~x.bits()) == 0) sum += static_cast<std::int64_t>(weight);
  }
  return sum;
}

std::int64_t local_variance_exact(const MultilinearFunction& f, const CubePoint& x) {
  require_same_dim(f.dim(), x.dim(), "local_variance_exact");
  require_integral(f);
  std::int64_t v = 0;
  for (std::size_t i = 0; i < f.dim(); ++i) {
    const std::int64_t d = discrete_derivative_exact(f, x, i);
    v += d * d;
  }
  return v;
}

double discrete_derivative(const FunctionTable& z, std::uint64_t x, std::size_t i) {
  require_coordinate(z.dim(), i);
  const std::uint64_t bit = std::uint64_t{1} << i;
  return (x & bit) ? z.at(x) - z.at(x & ~bit) : 0.0;
}

double local_variance(const FunctionTable& z, std::uint64_t x) {
  double v = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    const double d = discrete_derivative(z, x, i);
    v += d * d;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Monotonicity

std::string MonotoneViolation::describe() const {
  std::ostringstream os;
  os << (derivative ? "V_" + std::to_string(*derivative) : std::string("Z"))
     << " decreases when coordinate " << coordinate << " of " << lower.to_string()
     << " flips to 1 (" << before << " -> " << after << ")";
  return os.str();
}

MonotoneCheck check_monotone(const FunctionTable& z) {
  const std::size_t m = z.dim();
  double scale = 0.0;
  for (double v : z.values()) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * scale;
  for (std::uint64_t x = 0; x < z.size(); ++x) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint64_t bi = std::uint64_t{1} << i;
      if (x & bi) continue;
      const std::uint64_t up = x | bi;
      if (z.at(up) < z.at(x) - tol) {
        return {MonotoneViolation{CubePoint(m, x), i, std::nullopt, z.at(x), z.at(up)}};
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;  // V_i(x) = 0 here; covered by the Z check
        const double before = discrete_derivative(z, x, j);
        const double after = discrete_derivative(z, up, j);
        if (after < before - tol) {
          return {MonotoneViolation{CubePoint(m, x), i, j, before, after}};
        }
      }
    }
  }
  return {};
}

MonotoneCheck check_monotone(const MultilinearFunction& f) {
  return check_monotone(FunctionTable::from(f));
}

double global_discrete_norm(const FunctionTable& f) {
  double best = 0.0;
  for (std::uint64_t x = 0; x < f.size(); ++x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < f.dim(); ++i) {
      const double d = f.at(x) - f.at(x ^ (std::uint64_t{1} << i));
      sum += d * d;
    }
    best = std::max(best, sum);
  }
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Expectations and medians

double expectation(const FunctionTable& z, const ProductMeasure& mu) {
  require_same_dim(z.dim(), mu.dim(), "expectation");
  double sum = 0.0;
  for (std::uint64_t x = 0; x < z.size(); ++x) sum += mu.weight(x) * z.at(x);
  return sum;
}

double expectation(const MultilinearFunction& f, const ProductMeasure& mu) {
  require_same_dim(f.dim(), mu.dim(), "expectation");
  double sum = 0.0;
  for (const auto& [subset, weight] : f.terms()) {
    sum += weight * std::pow(mu.p(), static_cast<double>(std::popcount(subset)));
  }
  return sum;
}

double probability(const FunctionTable& z, const ProductMeasure& mu,
                   const std::function<bool(double)>& predicate) {
  require_same_dim(z.dim(), mu.dim(), "probability");
  double sum = 0.0;
  for (std::uint64_t x = 0; x < z.size(); ++x) {
    if (predicate(z.at(x))) sum += mu.weight(x);
  }
  return sum;
}

double tail_probability(const FunctionTable& z, double threshold, const ProductMeasure& mu) {
  return probability(z, mu, [threshold](double v) { return v >= threshold; });
}

double median(const FunctionTable& z, const ProductMeasure& mu) {
  require_same_dim(z.dim(), mu.dim(), "median");
  std::vector<double> weights(z.size());
  for (std::uint64_t x = 0; x < z.size(); ++x) weights[x] = mu.weight(x);
  return lower_median(z.values(), weights);
}

double lower_median(std::span<const double> values, std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw std::invalid_argument("lower_median: need equally many values and weights");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("lower_median: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("lower_median: weights sum to zero");
  const double half = 0.5 * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    cumulative += weights[idx];
    if (cumulative >= half) return values[idx];
  }
  return values[order.back()];
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const MultilinearFunction& f) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [subset, weight] : f.terms()) {
    nlohmann::json coords = nlohmann::json::array();
    for (std::size_t i = 0; i < f.dim(); ++i) {
      if ((subset >> i) & 1U) coords.push_back(i + 1);
    }
    terms.push_back({{"subset", coords}, {"weight", weight}});
  }
  j = {{"m", f.dim()}, {"terms", terms}};
}

MultilinearFunction multilinear_from_json(const nlohmann::json& j) {
  const auto m = j.at("m").get<std::size_t>();
  MultilinearFunction f(m);
  for (const auto& term : j.at("terms")) {
    std::uint64_t subset = 0;
    for (const auto& c : term.at("subset")) {
      const auto i = c.get<long long>();
      if (i < 1 || static_cast<std::size_t>(i) > m) {
        throw std::out_of_range("subset index " + std::to_string(i) + " outside 1.." +
                                std::to_string(m));
      }
      subset |= std::uint64_t{1} << (i - 1);
    }
    f.add_term(subset, term.at("weight").get<double>());
  }
  return f;
}

void to_json(nlohmann::json& j, const FunctionTable& t) {
  j = {{"m", t.dim()}, {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

FunctionTable table_from_json(const nlohmann::json& j) {
  return {j.at("m").get<std::size_t>(), j.at("values").get<std::vector<double>>()};
}

}  // namespace concentra::cube

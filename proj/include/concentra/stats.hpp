#pragma once

#include <cstdint>
#include <span>

namespace concentra::stats {

// Two-sided 95% standard normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double width() const { return high - low; }
  bool contains(double v) const { return low <= v && v <= high; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct ProportionEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double frequency = 0.0;
  Interval wilson;
};

// Wilson score interval for a binomial proportion.
ProportionEstimate proportion(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  Interval normal;  // mean ± z·se
};

// Sample mean with the normal-approximation interval (unbiased variance).
MeanEstimate mean_estimate(std::span<const double> values, double z = kZ95);

// Inverse of the empirical CDF: smallest v with F(v) >= q. Requires sorted input.
double lower_quantile(std::span<const double> sorted, double q);

}  // namespace concentra::stats

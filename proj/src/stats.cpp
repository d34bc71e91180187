#include "concentra/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace concentra::stats {

ProportionEstimate proportion(std::uint64_t successes, std::uint64_t trials, double z) {
  if (successes > trials) throw std::invalid_argument("proportion: successes exceed trials");
  ProportionEstimate est{successes, trials, 0.0, {0.0, 1.0}};
  if (trials == 0) return est;
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  est.frequency = phat;
  est.wilson = {std::max(0.0, std::min(phat, centre - half)),
                std::min(1.0, std::max(phat, centre + half))};
  return est;
}

MeanEstimate mean_estimate(std::span<const double> values, double z) {
  if (values.empty()) throw std::invalid_argument("mean_estimate: no values");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return {mean, se, {mean - z * se, mean + z * se}};
}

double lower_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("lower_quantile: no values");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()) - 1e-9));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace concentra::stats

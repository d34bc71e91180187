#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "concentra/errors.hpp"
#include "concentra/rng.hpp"
#include "concentra/sweeps.hpp"
#include "concentra/talagrand.hpp"
#include "oracles.hpp"

using namespace concentra;
using namespace concentra::talagrand;

namespace {

// P(Z >= a + sqrt(V t), Z > a) P(Z <= a) computed by direct loops.
double theorem1_lhs(const FunctionTable& z, const ProductMeasure& mu, double a, double t,
                    bool strict) {
  double upper = 0.0, lower = 0.0;
  for (std::uint64_t x = 0; x < z.size(); ++x) {
    double v = 0.0;
    for (std::size_t i = 0; i < z.dim(); ++i) {
      if ((x >> i & 1U) == 0) continue;
      const double d = z.at(x) - z.at(x & ~(std::uint64_t{1} << i));
      v += d * d;
    }
    const double w = mu.weight(x);
    const bool above = strict ? z.at(x) > a + 1e-9 : true;
    if (above && z.at(x) >= a + std::sqrt(v * t) - 1e-9) upper += w;
    if (z.at(x) <= a + 1e-9) lower += w;
  }
  return upper * lower;
}

}  // namespace

TEST_CASE("generators") {
  const CubePoint x(3, 0b101);
  CHECK(generators(VertexSet(3, {0b101}), x).generators == std::vector<std::uint64_t>{0});
  CHECK(generators(VertexSet(3, {0b010}), x).generators == std::vector<std::uint64_t>{0b111});
  const auto g = generators(VertexSet(2, {0b10, 0b01}), CubePoint(2, 0b11));
  CHECK(g.generators == std::vector<std::uint64_t>{0b01, 0b10});
  CHECK_FALSE(g.contains_zero());
  CHECK_THROWS(generators(VertexSet(3, std::vector<std::uint64_t>{}), x));
}

TEST_CASE("convex distance examples") {
  for (std::size_t m = 1; m <= 8; ++m) {
    const CubePoint x(m, 0b1011 & cube::full_mask(m));
    CHECK(convex_distance(VertexSet(m, {x.bits()}), x).value == 0.0);
    CHECK(convex_distance(VertexSet(m, {x.complement().bits()}), x).value ==
          doctest::Approx(std::sqrt(static_cast<double>(m))));
  }
  // Dense weight grid on the segment between (1,0) and (0,1).
  const double grid = oracle::segment_grid_min(2, 0b01, 0b10, 100000);
  CHECK(grid == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  const auto d = convex_distance(VertexSet(2, {0b10, 0b01}), CubePoint(2, 0b11));
  CHECK(d.value == doctest::Approx(grid).epsilon(1e-9));
  CHECK(d.witness_norm() == doctest::Approx(d.value));
}

TEST_CASE("min-norm solver against the pairwise-exchange oracle") {
  CounterRng rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rng.below(6);
    const std::size_t count = 1 + rng.below(12);
    std::vector<std::uint64_t> points;
    for (std::size_t i = 0; i < count; ++i) points.push_back(rng.below(std::uint64_t{1} << m));
    const auto result = min_norm_point(m, points);
    CHECK(result.value == doctest::Approx(oracle::min_norm(m, points)).epsilon(1e-6));
    double sum = 0.0;
    for (double w : result.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(result.witness_norm() == doctest::Approx(result.value).epsilon(1e-9));
    std::vector<std::uint64_t> unique(points);
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    CHECK(min_norm_point_exhaustive(m, unique).value == doctest::Approx(result.value).epsilon(1e-9));
  }
}

TEST_CASE("convex distance properties") {
  CounterRng rng(77);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t m = 2 + rng.below(5);
    const VertexSet a = random_vertex_set(m, rng);
    std::vector<std::uint64_t> bigger(a.members());
    bigger.push_back(rng.below(std::uint64_t{1} << m));
    const VertexSet b(m, bigger);
    const auto da = distance_table(a);
    const auto db = distance_table(b);
    for (std::uint64_t x = 0; x < da.size(); ++x) {
      CHECK((da[x] == 0.0) == a.contains(x));
      CHECK(db[x] <= da[x] + 1e-9);
      double hamming = 1e300;
      for (std::uint64_t y : a.members()) {
        hamming = std::min(hamming, std::sqrt(static_cast<double>(std::popcount(x ^ y))));
      }
      CHECK(da[x] <= hamming + 1e-9);
    }
  }
}

TEST_CASE("T1 examples") {
  const ProductMeasure mu(0.5, 2);
  std::vector<std::uint64_t> all{0, 1, 2, 3};
  const auto full = verify_T1(VertexSet(2, all), mu);
  CHECK(full.passed());
  CHECK(full.max_lhs_over_bound == doctest::Approx(1.0));
  const auto origin = verify_T1(VertexSet(2, {0}), mu);
  CHECK(origin.passed());
  // f_c(A, x)^2 = popcount(x) for A = {0}: P(A) P(f^2 >= 2) = 1/4 * 1/4.
  CHECK(origin.max_lhs_over_bound >= (0.25 * 0.25) / std::exp(-1.0) - 1e-12);
  CHECK_THROWS(verify_T1(VertexSet(2, std::vector<std::uint64_t>{}), mu));
}

TEST_CASE("T2 examples") {
  const VertexSet a(2, {0b10, 0b01});
  const CubePoint x(2, 0b11);
  const std::vector<double> ones{1.0, 1.0};
  const auto check = verify_T2(a, x, ones);
  CHECK(check.ok);
  CHECK(check.lhs == doctest::Approx(1.0));
  CHECK(check.bound == doctest::Approx(1.0));
  REQUIRE(check.witness.has_value());
  CHECK(a.contains(check.witness->bits()));
  const std::vector<double> zeros{0.0, 0.0};
  CHECK(verify_T2(a, x, zeros).ok);
  const auto inside = verify_T2(a, CubePoint(2, 0b10), ones);
  CHECK(inside.ok);
  CHECK(inside.lhs == 0.0);
  CHECK_THROWS(verify_T2(a, x, std::vector<double>{-1.0, 1.0}));
}

TEST_CASE("Theorem 1 examples") {
  const ProductMeasure mu(0.5, 1);
  const FunctionTable identity(1, {0.0, 1.0});
  Theorem1Options one;
  one.a_grid = {0.0};
  one.t_grid = {1.0};
  const auto r = verify_theorem1(identity, mu, one);
  CHECK(r.passed());
  CHECK(r.max_lhs_over_bound == doctest::Approx(0.25 / std::exp(-0.5)));

  // A constant: only strict exceedances count, so the deviation event is empty.
  const FunctionTable constant(2, {3.0, 3.0, 3.0, 3.0});
  const auto c = verify_theorem1(constant, ProductMeasure(0.5, 2));
  CHECK(c.passed());
  CHECK(c.max_lhs_over_bound == 0.0);
  Theorem1Options literal;
  literal.strict_exceedance = false;
  literal.t_grid = {0.0, 1.0};
  const auto lit = verify_theorem1(constant, ProductMeasure(0.5, 2), literal);
  REQUIRE(lit.violations.size() == 1);  // t = 1: lhs 1 > e^{-1/2}
  CHECK(lit.violations[0].t == 1.0);
  CHECK(lit.violations[0].lhs == doctest::Approx(1.0));

  const FunctionTable decreasing(1, {1.0, 0.0});
  CHECK_THROWS_AS(verify_theorem1(decreasing, mu), PreconditionError);
  Theorem1Options lax;
  lax.require_monotone = false;
  CHECK_NOTHROW(verify_theorem1(decreasing, mu, lax));
}

TEST_CASE("Theorem 1 verifier against direct loops") {
  CounterRng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t m = 1 + rng.below(6);
    const double p = rng.uniform(0.1, 0.9);
    const ProductMeasure mu(p, m);
    const auto z = FunctionTable::from(random_monotone_function(m, rng));
    for (double t : default_t_grid()) {
      for (std::uint64_t x = 0; x < z.size(); ++x) {
        Theorem1Options point;
        point.a_grid = {z.at(x)};
        point.t_grid = {t};
        const double expected = theorem1_lhs(z, mu, z.at(x), t, true);
        CHECK(verify_theorem1(z, mu, point).max_lhs_over_bound ==
              doctest::Approx(expected / std::exp(-t / 2.0)).epsilon(1e-9));
        CHECK(expected <= std::exp(-t / 2.0) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("proof chain") {
  MultilinearFunction f(2);
  f.add_term(0b11, 1.0);
  const auto same = verify_proof_chain(f, CubePoint(2, 0b00), CubePoint(2, 0b00), 0.0);
  CHECK(same.ok);
  CHECK(same.gap == 0.0);
  const auto r = verify_proof_chain(f, CubePoint(2, 0b11), CubePoint(2, 0b00), 0.0);
  CHECK(r.ok);
  CHECK(r.gap == 1.0);
  CHECK(r.weighted_distance == 2.0);
  CHECK(r.lowered == 0b11);
  CHECK_THROWS_AS(verify_proof_chain(f, CubePoint(2, 0), CubePoint(2, 0b11), 0.5),
                  PreconditionError);

  // Raising coordinate 0 before lowering coordinate 1 would overshoot V_1(x):
  // lowered coordinates have to be walked first.
  MultilinearFunction g(2);
  g.add_term(0b11, 1.0);
  const auto mixed = verify_proof_chain(g, CubePoint(2, 0b10), CubePoint(2, 0b01), 0.0);
  CHECK(mixed.ok);
  REQUIRE(mixed.steps.size() == 2);
  CHECK(mixed.steps[0].kind == StepKind::kLowered);
  CHECK(mixed.steps[1].kind == StepKind::kRaised);
}

TEST_CASE("Bobkov examples") {
  const FunctionTable constant(2, {2.0, 2.0, 2.0, 2.0});
  const auto c = verify_bobkov(constant, ProductMeasure(0.5, 2));
  CHECK(c.passed());
  CHECK(c.max_lhs_over_bound == 0.0);
  const FunctionTable identity(1, {0.0, 1.0});
  const std::vector<double> t{1.0};
  CHECK(verify_bobkov(identity, ProductMeasure(0.5, 1), t).max_lhs_over_bound == 0.0);
}

TEST_CASE("sweeps are small-scale clean and thread independent") {
  SweepConfig config;
  config.dims = {2, 3, 4, 5};
  config.ps = {0.2, 0.8};
  config.instances = 5;
  config.lambdas = 3;
  config.seed = 9;
  const auto serial = sweep_theorem1(config);
  CHECK(serial.passed());
  CHECK(serial.instances == 40);
  config.threads = 3;
  CHECK(sweep_theorem1(config) == serial);
  const auto distance = sweep_convex_distance(config);
  CHECK(distance.t1.passed());
  CHECK(distance.t2_random.passed());
  CHECK(distance.t2_derivatives.passed());
  CHECK(sweep_bobkov(config).passed());
  CHECK(sweep_proof_chain(config).passed());
}

TEST_CASE("report JSON") {
  const auto r = verify_T1(VertexSet(2, {0}), ProductMeasure(0.5, 2));
  const nlohmann::json j = r;
  CHECK(j["inequality"] == "T1");
  CHECK(j["violations"].empty());
  CHECK(j.contains("grid"));
}

#pragma once

// Randomized exhaustive sweeps: draw many small instances, verify each one over
// the whole cube, and fold the results into one report per inequality.
// Instances are keyed by (seed, m, p, index), so a sweep's output does not
// depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "concentra/rng.hpp"
#include "concentra/talagrand.hpp"

namespace concentra::talagrand {

// Nonnegative coefficients on 1..2m random monomials; integer weights for
// roughly half the draws so the exact arithmetic path is exercised too.
MultilinearFunction random_monotone_function(std::size_t m, CounterRng& rng);
// Nonempty; mixes sparse sets of a few points with dense Bernoulli sets.
VertexSet random_vertex_set(std::size_t m, CounterRng& rng);
// Arbitrary table: uniform noise, an indicator, or a tabulated monotone function.
FunctionTable random_table(std::size_t m, CounterRng& rng);
// Nonnegative weights, some exactly zero.
std::vector<double> random_weights(std::size_t m, CounterRng& rng);

struct SweepConfig {
  std::vector<std::size_t> dims{2, 3, 4, 5, 6, 7, 8};
  std::vector<double> ps{0.1, 0.3, 0.5, 0.7, 0.9};
  std::size_t instances = 20;  // per (m, p)
  std::size_t lambdas = 20;    // random weight vectors per instance (T2)
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// Self-normalized inequality on random monotone functions; a-grid = attained
// values of Z, t-grid = default_t_grid().
VerificationReport sweep_theorem1(const SweepConfig& config);

struct ConvexDistanceSweep {
  VerificationReport t1;         // random sets, t = every attained f_c^2
  VerificationReport t2_random;  // random nonnegative weights at every x
  // Sublevel sets {Z <= a} of random monotone Z with weights V_i(x), the
  // choice made in the self-normalized argument.
  VerificationReport t2_derivatives;
};

ConvexDistanceSweep sweep_convex_distance(const SweepConfig& config);

// Deviation inequality with the global discrete norm, on random tables.
VerificationReport sweep_bobkov(const SweepConfig& config);

// Telescoping argument for every x and every y in {Z <= a}, a random.
VerificationReport sweep_proof_chain(const SweepConfig& config);

}  // namespace concentra::talagrand

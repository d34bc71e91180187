#include "concentra/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "concentra/parallel.hpp"

namespace concentra::talagrand {

namespace {

enum Stream : std::uint64_t {
  kTheorem1 = 1,
  kConvexDistance = 2,
  kBobkov = 3,
  kProofChain = 4,
};

struct Instance {
  std::size_t m;
  double p;
  std::uint64_t key;
};

std::vector<Instance> instances(const SweepConfig& config) {
  std::vector<Instance> out;
  for (std::size_t m : config.dims) {
    for (std::size_t pi = 0; pi < config.ps.size(); ++pi) {
      for (std::size_t i = 0; i < config.instances; ++i) {
        out.push_back({m, config.ps[pi], (std::uint64_t{m} << 40) | (std::uint64_t{pi} << 32) | i});
      }
    }
  }
  return out;
}

std::string label(const Instance& inst) {
  std::ostringstream os;
  os << "m=" << inst.m << " p=" << inst.p << " key=" << inst.key;
  return os.str();
}

VerificationReport empty_report(const char* name) { return {name, {}, 0.0, {}, 0}; }

void tag(VerificationReport& report, const Instance& inst) {
  for (Violation& v : report.violations) {
    v.detail = v.detail.empty() ? label(inst) : label(inst) + " " + v.detail;
  }
}

// Runs `one` on every instance in parallel, then folds in instance order.
template <class One>
VerificationReport fold(const SweepConfig& config, const char* name, One&& one) {
  const auto all = instances(config);
  std::vector<VerificationReport> parts(all.size());
  parallel_for(all.size(), config.threads, [&](std::size_t i) {
    parts[i] = one(all[i]);
    tag(parts[i], all[i]);
  });
  VerificationReport total = empty_report(name);
  for (const auto& part : parts) total.merge(part);
  return total;
}

void record_t2(VerificationReport& report, const T2Check& check, std::uint64_t x,
               std::size_t m) {
  if (check.bound > 0.0) {
    report.max_lhs_over_bound = std::max(report.max_lhs_over_bound, check.lhs / check.bound);
  }
  if (!check.ok) {
    report.violations.push_back(
        {0.0, std::nullopt, check.lhs, check.bound, "x=" + CubePoint(m, x).to_string()});
  }
}

}  // namespace

MultilinearFunction random_monotone_function(std::size_t m, CounterRng& rng) {
  MultilinearFunction f(m);
  const bool integral = rng.bernoulli(0.5);
  const std::size_t terms = 1 + rng.below(2 * m);
  const double density = rng.uniform(0.15, 0.7);
  for (std::size_t t = 0; t < terms; ++t) {
    std::uint64_t subset = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (rng.bernoulli(density)) subset |= std::uint64_t{1} << i;
    }
    const double weight = integral ? static_cast<double>(1 + rng.below(5)) : rng.uniform(0.0, 3.0);
    f.add_term(subset, weight);
  }
  return f;
}

VertexSet random_vertex_set(std::size_t m, CounterRng& rng) {
  const std::uint64_t size = std::uint64_t{1} << m;
  std::vector<std::uint64_t> members;
  if (rng.bernoulli(0.35)) {
    const std::size_t count = 1 + rng.below(4);
    for (std::size_t i = 0; i < count; ++i) members.push_back(rng.below(size));
  } else {
    const double density = rng.uniform(0.02, 0.9);
    for (std::uint64_t y = 0; y < size; ++y) {
      if (rng.bernoulli(density)) members.push_back(y);
    }
    if (members.empty()) members.push_back(rng.below(size));
  }
  return {m, std::move(members)};
}

FunctionTable random_table(std::size_t m, CounterRng& rng) {
  const std::size_t size = std::size_t{1} << m;
  std::vector<double> values(size);
  switch (rng.below(3)) {
    case 0:
      for (double& v : values) v = rng.uniform(-1.0, 1.0);
      break;
    case 1: {
      const double density = rng.uniform(0.05, 0.95);
      for (double& v : values) v = rng.bernoulli(density) ? 1.0 : 0.0;
      break;
    }
    default:
      return FunctionTable::from(random_monotone_function(m, rng));
  }
  return {m, std::move(values)};
}

std::vector<double> random_weights(std::size_t m, CounterRng& rng) {
  std::vector<double> lambda(m);
  for (double& l : lambda) l = rng.bernoulli(0.2) ? 0.0 : rng.uniform(0.0, 2.0);
  return lambda;
}

VerificationReport sweep_theorem1(const SweepConfig& config) {
  return fold(config, "theorem1", [&](const Instance& inst) {
    CounterRng rng(derive_seed(config.seed, inst.key), kTheorem1);
    const MultilinearFunction f = random_monotone_function(inst.m, rng);
    return verify_theorem1(f, ProductMeasure(inst.p, inst.m));
  });
}

ConvexDistanceSweep sweep_convex_distance(const SweepConfig& config) {
  const auto all = instances(config);
  struct Parts {
    VerificationReport t1, t2_random, t2_derivatives;
  };
  std::vector<Parts> parts(all.size());
  parallel_for(all.size(), config.threads, [&](std::size_t idx) {
    const Instance& inst = all[idx];
    CounterRng rng(derive_seed(config.seed, inst.key), kConvexDistance);
    const ProductMeasure mu(inst.p, inst.m);
    const std::uint64_t size = std::uint64_t{1} << inst.m;
    Parts& out = parts[idx];

    const VertexSet a = random_vertex_set(inst.m, rng);
    const std::vector<double> dist = distance_table(a);
    out.t1 = verify_T1(a, mu, dist);
    out.t2_random = empty_report("T2");
    out.t2_random.instances = 1;
    for (std::size_t l = 0; l < config.lambdas; ++l) {
      const std::vector<double> lambda = random_weights(inst.m, rng);
      for (std::uint64_t x = 0; x < size; ++x) {
        record_t2(out.t2_random, verify_T2(a, CubePoint(inst.m, x), lambda, dist[x]), x, inst.m);
      }
    }

    const FunctionTable z = FunctionTable::from(random_monotone_function(inst.m, rng));
    const double level = z.at(rng.below(size));
    const VertexSet sub = VertexSet::sublevel(z, level);
    const std::vector<double> sub_dist = distance_table(sub);
    out.t1.merge(verify_T1(sub, mu, sub_dist));
    out.t2_derivatives = empty_report("T2");
    out.t2_derivatives.instances = 1;
    std::vector<double> lambda(inst.m);
    for (std::uint64_t x = 0; x < size; ++x) {
      for (std::size_t i = 0; i < inst.m; ++i) lambda[i] = cube::discrete_derivative(z, x, i);
      record_t2(out.t2_derivatives, verify_T2(sub, CubePoint(inst.m, x), lambda, sub_dist[x]), x,
                inst.m);
    }
    tag(out.t1, inst);
    tag(out.t2_random, inst);
    tag(out.t2_derivatives, inst);
  });
  ConvexDistanceSweep total{empty_report("T1"), empty_report("T2"), empty_report("T2")};
  for (const auto& p : parts) {
    total.t1.merge(p.t1);
    total.t2_random.merge(p.t2_random);
    total.t2_derivatives.merge(p.t2_derivatives);
  }
  return total;
}

VerificationReport sweep_bobkov(const SweepConfig& config) {
  return fold(config, "bobkov", [&](const Instance& inst) {
    CounterRng rng(derive_seed(config.seed, inst.key), kBobkov);
    return verify_bobkov(random_table(inst.m, rng), ProductMeasure(inst.p, inst.m));
  });
}

VerificationReport sweep_proof_chain(const SweepConfig& config) {
  return fold(config, "proof_chain", [&](const Instance& inst) {
    CounterRng rng(derive_seed(config.seed, inst.key), kProofChain);
    const std::uint64_t size = std::uint64_t{1} << inst.m;
    const FunctionTable z = FunctionTable::from(random_monotone_function(inst.m, rng));
    const double level = z.at(rng.below(size));
    VerificationReport report = empty_report("proof_chain");
    report.instances = 1;
    for (std::uint64_t y = 0; y < size; ++y) {
      if (z.at(y) > level) continue;
      for (std::uint64_t x = 0; x < size; ++x) {
        const auto chain =
            verify_proof_chain(z, CubePoint(inst.m, x), CubePoint(inst.m, y), level);
        if (chain.weighted_distance > 0.0) {
          report.max_lhs_over_bound =
              std::max(report.max_lhs_over_bound, chain.gap / chain.weighted_distance);
        }
        if (!chain.ok) {
          report.violations.push_back({0.0, level, chain.gap, chain.weighted_distance,
                                       "x=" + CubePoint(inst.m, x).to_string() +
                                           " y=" + CubePoint(inst.m, y).to_string()});
        }
      }
    }
    return report;
  });
}

}  // namespace concentra::talagrand

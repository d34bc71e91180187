#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (key, stream, counter), so results do not
// depend on the order in which draws are made or on how work is split across
// threads. The mixing function is the splitmix64 finalizer, which is a
// bijection on 64-bit words; the three-stage chain below keys it by the
// stream id and the counter.

#include <cstdint>

namespace concentra {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t stream,
                                     std::uint64_t counter) noexcept {
  return splitmix64(splitmix64(splitmix64(key) ^ stream) ^ (counter * 0xd1342543de82ef95ULL));
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Seed of sub-experiment `index` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return counter_hash(master, 0x5eedULL, index);
}

// Sequential view over one counter-based stream. Copyable; two copies with the
// same position produce the same draws.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : key_(key), stream_(stream) {}

  constexpr std::uint64_t next_u64() noexcept { return counter_hash(key_, stream_, counter_++); }

  constexpr double uniform() noexcept { return to_unit_interval(next_u64()); }

  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Integer in [0, bound). Multiply-shift; bias is at most bound / 2^64.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace concentra

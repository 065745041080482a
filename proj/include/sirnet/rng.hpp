#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace sirnet {

/// SplitMix64 finalizer. Used for seed derivation and counter-based draws.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Fixed splitting rule: folds a sequence of keys into a parent seed.
/// derive_seed(master, grid, trial) is the per-trial seed used by the harness.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(parent);
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

/// Maps 64 random bits to a double in [0, 1) with 53 bits of precision.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform draw keyed by (seed, a, b). Independent across keys,
/// and identical for a given key regardless of call order.
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return to_unit(derive_seed(seed, {a, b}));
}

/// Sequential stream. mt19937_64 for the bits, our own mapping to doubles so
/// streams are identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Child stream; does not advance this one.
  Rng split(std::uint64_t key) const { return Rng(derive_seed(seed_, {key})); }

  double uniform() { return to_unit(engine_()); }

  /// Uniform in (0, 1]; safe as a log argument.
  double uniform_open0() { return 1.0 - uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Number of failures before the first success of Bernoulli(p) trials.
  /// Returns max() when p == 0.
  std::uint64_t geometric_skip(double p) {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    const double g = std::floor(std::log(uniform_open0()) / std::log1p(-p));
    if (g >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(g);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace sirnet

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scobul {

/// 64-bit FNV-1a over a string, used to turn stream names into seed material.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Root-seed splitting scheme. Every subsystem draws from its own named
/// stream so that, e.g., regenerating a signal never perturbs topology draws:
///
///   seed = splitmix64(splitmix64(root ^ fnv1a64(name)) ^ index)
///
/// Stream names used by this project: "signal", "scene", "dvs", "topology",
/// "weights" (indexed per fitness repetition), "ga".
constexpr std::uint64_t seed_stream(std::uint64_t root, std::string_view name,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(root ^ fnv1a64(name)) ^ index);
}

/// Deterministic RNG: std::mt19937_64 core (bit-stable across platforms per
/// the standard) with hand-rolled draw helpers, so no draw depends on the
/// standard library's implementation-defined distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n), n >= 1. Unbiased (Lemire rejection).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace scobul

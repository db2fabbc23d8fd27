#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

// Counter-based random draws: every variate is produced from a key that
// encodes its coordinates (seed, layer, row, col, ...), so the value does
// not depend on the order in which draws happen or on how work is split
// across threads.

namespace relu1d::rng {

// splitmix64 finalizer (public-domain constants).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// Fold one coordinate into a key. Chaining combine() over a coordinate tuple
// gives a well-mixed 64-bit key for that tuple.
constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h + kGamma + v);
}

constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = mix64(seed + kGamma);
  for (std::uint64_t p : parts) h = combine(h, p);
  return h;
}

// A tiny splitmix64 stream; only ever advanced a couple of steps per key.
struct Stream {
  std::uint64_t state;
  constexpr std::uint64_t next() noexcept {
    state += kGamma;
    return mix64(state);
  }
};

// Uniform in (0,1]; the +1 keeps log() off exactly zero.
inline double u01_positive(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0,1).
inline double u01(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// One standard normal variate, fully determined by the key (Box-Muller).
inline double standard_normal(std::uint64_t key) noexcept {
  Stream s{key};
  const double u1 = u01_positive(s.next());
  const double u2 = u01(s.next());
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace relu1d::rng

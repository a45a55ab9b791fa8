#pragma once

// Counter-based random numbers (Philox 4x32-10). Every draw is a pure
// function of (seed, stream, step), so parallel ensembles are reproducible
// without shared generator state and independent of scheduling order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace widthsde::rng {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

// One 128-bit Philox block keyed by seed, with the counter laid out as
// (step lo, step hi, stream lo, stream hi).
inline std::array<std::uint32_t, 4> philox_block(std::uint64_t seed,
                                                 std::uint64_t stream,
                                                 std::uint64_t step) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::mul_hi_lo(detail::kPhiloxM0, ctr[0], hi0, lo0);
    detail::mul_hi_lo(detail::kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += detail::kWeyl0;
    key[1] += detail::kWeyl1;
  }
  return ctr;
}

inline std::pair<std::uint64_t, std::uint64_t> philox_u64x2(
    std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  const auto b = philox_block(seed, stream, step);
  const std::uint64_t a =
      (static_cast<std::uint64_t>(b[1]) << 32) | static_cast<std::uint64_t>(b[0]);
  const std::uint64_t c =
      (static_cast<std::uint64_t>(b[3]) << 32) | static_cast<std::uint64_t>(b[2]);
  return {a, c};
}

// Uniform on (0,1]; the +1 keeps log() finite.
inline double uniform_open(std::uint64_t v) {
  return (static_cast<double>(v >> 11) + 1.0) * 0x1.0p-53;
}

// Uniform on [0,1).
inline double uniform_halfopen(std::uint64_t v) {
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

// One standard Gaussian per (seed, stream, step) via Box-Muller; the sine
// branch is discarded so the mapping stays a pure function of the key.
inline double gaussian(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t step) {
  const auto [a, c] = philox_u64x2(seed, stream, step);
  const double u1 = uniform_open(a);
  const double u2 = uniform_halfopen(c);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

inline std::pair<double, double> gaussian_pair(std::uint64_t seed,
                                               std::uint64_t stream,
                                               std::uint64_t step) {
  const auto [a, c] = philox_u64x2(seed, stream, step);
  const double u1 = uniform_open(a);
  const double u2 = uniform_halfopen(c);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t step) {
  return uniform_halfopen(philox_u64x2(seed, stream, step).first);
}

// Derive a child stream id, e.g. for restarted path segments.
inline std::uint64_t substream(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stable identifier for a finished stream, stored with path artifacts.
inline std::uint64_t fingerprint(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t n_steps) {
  return philox_u64x2(seed, stream, ~n_steps).second;
}

}  // namespace widthsde::rng

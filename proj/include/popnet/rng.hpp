#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, step, stream id, block index), so the values an agent receives do not
// depend on pairing order or on how work is split across threads.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cmath>
#include <cstdint>
#include <limits>

namespace popnet {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon, Moraes, Dror, Shaw; SC'11).
constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

namespace detail {

/// Central branch of AS 241, valid for |q| <= 0.425 with q = p - 0.5. Branch
/// free so batched callers vectorize; shared with the scalar path so both give
/// identical bits.
inline double ppnd16_central(double q) noexcept {
  const double r = 0.180625 - q * q;
  return q *
         (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
              45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
           133.14166789178437745) * r + 3.387132872796366608) /
         (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
              21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
           42.313330701600911252) * r + 1.0);
}

}  // namespace detail

/// Inverse of the standard normal CDF for p in (0,1); Wichura's AS 241
/// (PPND16), relative accuracy about 1e-16.
inline double normal_quantile(double p) noexcept {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) return detail::ppnd16_central(q);
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734) /
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772) /
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

/// normal_quantile over an array. The central branch runs branch free over
/// all entries, then the tails (about 15%) are redone one by one.
inline void normal_quantiles(const double* p, double* z, std::size_t n) noexcept {
  for (std::size_t k = 0; k < n; ++k) z[k] = detail::ppnd16_central(p[k] - 0.5);
  for (std::size_t k = 0; k < n; ++k)
    if (!(std::abs(p[k] - 0.5) <= 0.425)) z[k] = normal_quantile(p[k]);
}

/// Uniform on (0,1) from two 32-bit words, high word first.
inline double uniform_from_words(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t x = (std::uint64_t(hi) << 32) | lo;
  return (double(x >> 11) + 0.5) * 0x1.0p-53;
}

/// Reserved stream ids that never collide with agent indices.
namespace streams {
inline constexpr std::uint32_t pairing = 0xFFFFFFFFu;
inline constexpr std::uint32_t init = 0xFFFFFFFEu;
}  // namespace streams

/// A sequential view over one (seed, step, stream) counter lane.
/// Satisfies UniformRandomBitGenerator.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t seed, std::uint64_t step, std::uint32_t stream) noexcept
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        step_lo_(std::uint32_t(step)),
        step_hi_(std::uint32_t(step >> 32)),
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t hi = next32();
    return (hi << 32) | next32();
  }

  /// Next 32-bit word of the lane.
  std::uint32_t next32() noexcept {
    if (buffered_ == 0) {
      buf_ = philox4x32_10({block_++, stream_, step_lo_, step_hi_}, key_);
      buffered_ = 4;
    }
    return buf_[4 - buffered_--];
  }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() noexcept {
    const std::uint32_t hi = next32();
    return uniform_from_words(hi, next32());
  }

  /// Standard normal by inversion of one uniform, so each variate consumes a
  /// fixed amount of the lane.
  double normal() noexcept { return normal_quantile(uniform()); }

  /// Unbiased integer in [0, bound) for bound < 2^32 (Lemire's
  /// multiply-shift with rejection).
  std::uint32_t below(std::uint32_t bound) noexcept {
    std::uint64_t m = std::uint64_t(next32()) * bound;
    auto low = std::uint32_t(m);
    if (low < bound) {
      const std::uint32_t threshold = (0u - bound) % bound;
      while (low < threshold) {
        m = std::uint64_t(next32()) * bound;
        low = std::uint32_t(m);
      }
    }
    return std::uint32_t(m >> 32);
  }

 private:
  PhiloxKey key_;
  std::uint32_t step_lo_, step_hi_, stream_;
  std::uint32_t block_ = 0;
  PhiloxBlock buf_{};
  int buffered_ = 0;
};

/// First block of the lanes first, first+1, ..., first+n-1 of one (seed, step):
/// the same words CounterStream(seed, step, first + k) starts with. Written
/// lane by lane with the rounds unrolled so the loop over lanes vectorizes.
inline void philox_first_blocks(std::uint64_t seed, std::uint64_t step, std::uint32_t first, std::size_t n,
                                std::uint32_t* w0, std::uint32_t* w1, std::uint32_t* w2, std::uint32_t* w3) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  const std::uint32_t key0 = std::uint32_t(seed), key1 = std::uint32_t(seed >> 32);
  const std::uint32_t step_lo = std::uint32_t(step), step_hi = std::uint32_t(step >> 32);
  for (std::size_t k = 0; k < n; ++k) {
    std::uint32_t x0 = 0, x1 = first + std::uint32_t(k), x2 = step_lo, x3 = step_hi;
    std::uint32_t k0 = key0, k1 = key1;
#pragma GCC unroll 10
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(kM0) * x0;
      const std::uint64_t p1 = std::uint64_t(kM1) * x2;
      x0 = std::uint32_t(p1 >> 32) ^ x1 ^ k0;
      x1 = std::uint32_t(p1);
      x2 = std::uint32_t(p0 >> 32) ^ x3 ^ k1;
      x3 = std::uint32_t(p0);
      k0 += kW0;
      k1 += kW1;
    }
    w0[k] = x0;
    w1[k] = x1;
    w2[k] = x2;
    w3[k] = x3;
  }
}

}  // namespace popnet

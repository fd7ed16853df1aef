#pragma once

#include <cmath>
#include <limits>

#include "popnet/params.hpp"
#include "popnet/rng.hpp"

namespace popnet {

/// Zero-mean noise law. Gaussian draws are truncated symmetrically at
/// +-truncation standard deviations before the admissibility floor is applied.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::truncated_gaussian;
  double std = 1.0;
  double lower_bound = -std::numeric_limits<double>::infinity();
  double truncation = 6.0;
};

struct NoiseDraw {
  double value = 0.0;
  int resamples = 0;  // draws rejected by the floor
};

/// Floor rejections give up after this many attempts and return the floor.
inline constexpr int kMaxFloorResamples = 64;

inline NoiseDraw sample_noise(const NoiseSpec& spec, CounterStream& rng) {
  NoiseDraw d;
  if (spec.std == 0.0) return d;
  for (;; ++d.resamples) {
    double x;
    if (spec.family == NoiseFamily::two_point) {
      x = (rng() >> 63) ? spec.std : -spec.std;
    } else {
      double z;
      do {
        z = rng.normal();
      } while (std::abs(z) > spec.truncation);
      x = spec.std * z;
    }
    if (x >= spec.lower_bound) {
      d.value = x;
      return d;
    }
    if (d.resamples + 1 >= kMaxFloorResamples) {
      d.value = spec.lower_bound;
      ++d.resamples;
      return d;
    }
  }
}

/// Standard deviation of a unit normal truncated to [-a, a].
inline double truncated_normal_std(double a) {
  const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * 3.14159265358979323846);
  const double mass = std::erf(a / std::sqrt(2.0));
  return std::sqrt(1.0 - 2.0 * a * pdf / mass);
}

}  // namespace popnet

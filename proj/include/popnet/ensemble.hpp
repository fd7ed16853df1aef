#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace popnet {

/// Particle population in structure-of-arrays layout.
struct Ensemble {
  std::vector<double> v;              // opinions in [-1, 1]
  std::vector<double> c;              // contacts, > 0
  std::vector<std::uint32_t> group;   // group index per agent

  std::size_t size() const noexcept { return v.size(); }

  void resize(std::size_t n) {
    v.resize(n);
    c.resize(n);
    group.resize(n);
  }

  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace popnet

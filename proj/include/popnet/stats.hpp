#pragma once

// Ensemble observables: global and per-group means, local opinion mass and
// normalized histograms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "popnet/ensemble.hpp"

namespace popnet {

struct GroupMeans {
  std::vector<double> m_v;
  std::vector<double> m_c;
};

/// Binning layout. Contact bins are log-uniform on [c_lo, c_hi]; index 0 is
/// the underflow bin and index bins_c + 1 the overflow bin.
struct HistogramSpec {
  int bins_v = 100;
  double c_lo = 1e-1;
  double c_hi = 1e3;
  int bins_c = 80;

  int contact_slots() const noexcept { return bins_c + 2; }

  int opinion_bin(double v) const noexcept {
    auto k = static_cast<int>(std::floor((v + 1.0) * 0.5 * bins_v));
    return std::clamp(k, 0, bins_v - 1);
  }

  int contact_bin(double c) const noexcept {
    if (c < c_lo) return 0;
    if (c >= c_hi) return bins_c + 1;
    auto k = static_cast<int>(std::floor(std::log(c / c_lo) / std::log(c_hi / c_lo) * bins_c));
    return 1 + std::clamp(k, 0, bins_c - 1);
  }

  /// Lower edge of contact slot k (k in 1..bins_c+1; slot 0 starts at 0).
  double contact_edge(int k) const noexcept {
    if (k <= 0) return 0.0;
    return c_lo * std::pow(c_hi / c_lo, double(k - 1) / bins_c);
  }

  double opinion_edge(int k) const noexcept { return -1.0 + 2.0 * double(k) / bins_v; }
};

struct Histograms {
  std::vector<double> v;      // bins_v masses
  std::vector<double> c;      // bins_c + 2 masses
  std::vector<double> joint;  // row-major [opinion bin][contact slot]
};

struct Observables {
  double t = 0.0;
  double m_v_global = 0.0;
  double m_c_global = 0.0;
  std::vector<double> m_v_by_group;
  std::vector<double> m_c_by_group;
  Histograms hist;
};

inline double mean_opinion(const Ensemble& e) {
  if (e.size() == 0) throw std::invalid_argument("mean_opinion: empty ensemble");
  CompensatedSum s;
  for (double x : e.v) s.add(x);
  return s.value() / double(e.size());
}

inline double mean_contacts(const Ensemble& e) {
  if (e.size() == 0) throw std::invalid_argument("mean_contacts: empty ensemble");
  CompensatedSum s;
  for (double x : e.c) s.add(x);
  return s.value() / double(e.size());
}

/// Scratch buffers for local_opinion_counts, reusable across calls.
struct OpinionSortWorkspace {
  std::vector<std::uint64_t> keys, keys_tmp;
  std::vector<std::uint32_t> order, order_tmp;
  std::vector<double> sorted;
};

namespace detail {

/// Order-preserving map from double to unsigned 64-bit integer.
inline std::uint64_t ordered_bits(double x) noexcept {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return (u >> 63) ? ~u : (u | 0x8000000000000000ull);
}

/// LSD radix argsort of the opinions (six 11-bit passes).
inline void argsort_opinions(const std::vector<double>& v, OpinionSortWorkspace& ws) {
  const std::size_t n = v.size();
  ws.keys.resize(n);
  ws.keys_tmp.resize(n);
  ws.order.resize(n);
  ws.order_tmp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ws.keys[i] = ordered_bits(v[i]);
    ws.order[i] = std::uint32_t(i);
  }
  constexpr int kBits = 11;
  constexpr std::size_t kBuckets = std::size_t{1} << kBits;
  std::vector<std::uint32_t> count(kBuckets);
  for (int shift = 0; shift < 64; shift += kBits) {
    std::fill(count.begin(), count.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) ++count[(ws.keys[i] >> shift) & (kBuckets - 1)];
    if (count[(ws.keys[0] >> shift) & (kBuckets - 1)] == n) continue;  // digit constant
    std::uint32_t run = 0;
    for (auto& c : count) {
      const auto k = c;
      c = run;
      run += k;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto pos = count[(ws.keys[i] >> shift) & (kBuckets - 1)]++;
      ws.keys_tmp[pos] = ws.keys[i];
      ws.order_tmp[pos] = ws.order[i];
    }
    ws.keys.swap(ws.keys_tmp);
    ws.order.swap(ws.order_tmp);
  }
  ws.sorted.resize(n);
  for (std::size_t k = 0; k < n; ++k) ws.sorted[k] = v[ws.order[k]];
}

}  // namespace detail

/// Per agent, the number of agents j (itself included) with |v_j - v_i| <= r.
/// One radix argsort plus a two-pointer sweep. The window tests use the same
/// floating-point differences as a direct pairwise check, so counts are exact.
inline std::vector<std::uint32_t> local_opinion_counts(const Ensemble& e, double r, OpinionSortWorkspace& ws) {
  const std::size_t n = e.size();
  std::vector<std::uint32_t> counts(n);
  if (n == 0) return counts;
  detail::argsort_opinions(e.v, ws);
  const auto& w = ws.sorted;
  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vi = w[k];
    while (vi - w[lo] > r) ++lo;
    if (hi < k) hi = k;
    while (hi < n && w[hi] - vi <= r) ++hi;
    counts[ws.order[k]] = std::uint32_t(hi - lo);
  }
  return counts;
}

/// Local opinion mass rho_i in [1/n, 1] for every agent.
inline std::vector<double> local_opinion_mass_all(const Ensemble& e, double r, OpinionSortWorkspace& ws) {
  if (!(r > 0.0)) throw std::invalid_argument("local_opinion_mass_all: radius must be positive");
  const auto counts = local_opinion_counts(e, r, ws);
  std::vector<double> rho(counts.size());
  const double n = double(e.size());
  for (std::size_t i = 0; i < counts.size(); ++i) rho[i] = double(counts[i]) / n;
  return rho;
}

inline std::vector<double> local_opinion_mass_all(const Ensemble& e, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("local_opinion_mass_all: radius must be positive");
  OpinionSortWorkspace ws;
  return local_opinion_mass_all(e, r, ws);
}

inline GroupMeans group_means(const Ensemble& e, std::size_t n_groups) {
  std::vector<CompensatedSum> sv(n_groups), sc(n_groups);
  std::vector<std::size_t> count(n_groups, 0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto g = e.group[i];
    if (g >= n_groups) throw std::out_of_range("group_means: group index out of range");
    sv[g].add(e.v[i]);
    sc[g].add(e.c[i]);
    ++count[g];
  }
  GroupMeans out;
  for (std::size_t g = 0; g < n_groups; ++g) {
    if (count[g] == 0) throw std::invalid_argument("group_means: empty group " + std::to_string(g));
    out.m_v.push_back(sv[g].value() / double(count[g]));
    out.m_c.push_back(sc[g].value() / double(count[g]));
  }
  return out;
}

/// Normalized frequency histograms (each sums to 1).
inline Histograms build_histograms(const Ensemble& e, const HistogramSpec& spec) {
  if (spec.bins_v < 1 || spec.bins_c < 1 || !(spec.c_lo > 0.0) || !(spec.c_hi > spec.c_lo))
    throw std::invalid_argument("build_histograms: invalid binning");
  const int slots = spec.contact_slots();
  std::vector<std::uint64_t> hv(spec.bins_v, 0), hc(slots, 0), hj(std::size_t(spec.bins_v) * slots, 0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const int a = spec.opinion_bin(e.v[i]);
    const int b = spec.contact_bin(e.c[i]);
    ++hv[a];
    ++hc[b];
    ++hj[std::size_t(a) * slots + b];
  }
  const double inv_n = e.size() ? 1.0 / double(e.size()) : 0.0;
  auto normalize = [inv_n](const std::vector<std::uint64_t>& h) {
    std::vector<double> out(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) out[k] = double(h[k]) * inv_n;
    return out;
  };
  return {normalize(hv), normalize(hc), normalize(hj)};
}

/// Full snapshot record at time t.
inline Observables observe(const Ensemble& e, std::size_t n_groups, double t, const HistogramSpec* spec) {
  Observables o;
  o.t = t;
  o.m_v_global = mean_opinion(e);
  o.m_c_global = mean_contacts(e);
  auto gm = group_means(e, n_groups);
  o.m_v_by_group = std::move(gm.m_v);
  o.m_c_by_group = std::move(gm.m_c);
  if (spec) o.hist = build_histograms(e, *spec);
  return o;
}

}  // namespace popnet

#pragma once

// Asymptotic Nanbu-type particle scheme with epsilon = dt: every step draws a
// random disjoint pairing, evaluates the feedback controls from the frozen
// pre-step state, and applies the scaled contact and binary opinion rules to
// both members of each pair.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "popnet/control.hpp"
#include "popnet/ensemble.hpp"
#include "popnet/model.hpp"
#include "popnet/noise.hpp"
#include "popnet/params.hpp"
#include "popnet/rng.hpp"
#include "popnet/stats.hpp"

namespace popnet {

struct Diagnostics {
  std::uint64_t opinion_clamps = 0;     // opinion updates pushed back into [-1, 1]
  std::uint64_t contact_resamples = 0;  // eta redraws after a non-positive c'
  std::uint64_t contact_clamps = 0;     // c' set to the floor after resampling failed
  std::uint64_t noise_resamples = 0;    // eta draws rejected by the admissibility floor
  std::uint64_t unconfident_pairs = 0;  // pairs outside the confidence bound
  std::uint64_t idle_agents = 0;        // unpaired agents (odd population)

  Diagnostics& operator+=(const Diagnostics& o) noexcept {
    opinion_clamps += o.opinion_clamps;
    contact_resamples += o.contact_resamples;
    contact_clamps += o.contact_clamps;
    noise_resamples += o.noise_resamples;
    unconfident_pairs += o.unconfident_pairs;
    idle_agents += o.idle_agents;
    return *this;
  }
  std::uint64_t clamps() const noexcept { return opinion_clamps + contact_clamps; }
  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

/// Quantities frozen at the start of a step.
struct StepContext {
  double m_v = 0.0;
  std::vector<double> rho;  // empty when no gate needs the local mass
  double epsilon = 1e-3;
  std::uint64_t step = 0;
};

struct RunResult {
  std::vector<Observables> snapshots;   // t = 0 plus the configured schedule, with histograms
  std::vector<Observables> trajectory;  // means only, every output.means_interval
  Ensemble final_ensemble;
  Diagnostics diagnostics;
  std::vector<std::string> group_names;
};

/// Step index used to key the initial-sampling streams.
inline constexpr std::uint64_t kInitStep = ~std::uint64_t{0};

/// Samples every agent uniformly from its group's initial rectangle. Agents are
/// laid out group by group.
inline Ensemble initialize(const ScenarioConfig& cfg) {
  validate(cfg);
  const auto sizes = group_sizes(cfg);
  Ensemble e;
  e.resize(std::size_t(cfg.sim.n_particles));
  std::size_t i = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const auto& gs = cfg.groups[g];
    for (std::int64_t k = 0; k < sizes[g]; ++k, ++i) {
      CounterStream rng(cfg.sim.seed, kInitStep, std::uint32_t(i));
      const double uc = rng.uniform();
      const double uv = rng.uniform();
      e.c[i] = gs.init_c.lo == gs.init_c.hi ? gs.init_c.lo : gs.init_c.lo + (gs.init_c.hi - gs.init_c.lo) * uc;
      e.v[i] = gs.init_v.lo == gs.init_v.hi ? gs.init_v.lo : gs.init_v.lo + (gs.init_v.hi - gs.init_v.lo) * uv;
      e.group[i] = std::uint32_t(g);
    }
  }
  return e;
}

using AgentPair = std::pair<std::uint32_t, std::uint32_t>;

/// floor(n/2) disjoint unordered pairs from a uniform random permutation.
inline std::vector<AgentPair> sample_pairs(std::size_t n, std::uint64_t seed, std::uint64_t step) {
  if (n < 2) throw std::invalid_argument("sample_pairs: need at least two agents");
  if (n > 0xFFFFFFF0u) throw std::invalid_argument("sample_pairs: population too large");
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  CounterStream rng(seed, step, streams::pairing);
  for (std::size_t k = n - 1; k > 0; --k) std::swap(perm[k], perm[rng.below(std::uint32_t(k + 1))]);
  std::vector<AgentPair> pairs(n / 2);
  for (std::size_t k = 0; k < pairs.size(); ++k) pairs[k] = {perm[2 * k], perm[2 * k + 1]};
  return pairs;
}

/// Scaled controlled contact update, before any boundary handling:
///   c' = c (1 - eps beta (Psi^eps(c/c_bar) + Phi(v) - kappa) + eta).
inline double update_contacts(double c, double v, double kappa, double m_v, const ScaledValueFunction& psi,
                              double epsilon, const ContactParams& p, double eta) {
  const double drift = psi(c / p.c_bar) + opinion_penalty(v, m_v, p) - kappa;
  return c * (1.0 - epsilon * p.beta * drift + eta);
}

inline double update_contacts(double c, double v, double kappa, double m_v, double epsilon, const ContactParams& p,
                              double eta) {
  return update_contacts(c, v, kappa, m_v, ScaledValueFunction(epsilon, p), epsilon, p, eta);
}

/// Scaled binary opinion update, before any boundary handling. `xi`, `xi_star`
/// are unit-variance draws.
inline std::pair<double, double> update_opinions_pair(double v, double v_star, double c, double c_star, double u,
                                                      double u_star, double epsilon, const OpinionParams& op,
                                                      double xi, double xi_star) {
  const double ea = epsilon * op.alpha;
  const double amp = std::sqrt(epsilon) * op.sigma;
  const double vp = v + ea * (compromise(v, v_star, c, c_star, op) * (v_star - v) + u) + amp * diffusion_weight(v) * xi;
  const double vsp =
      v_star + ea * (compromise(v_star, v, c_star, c, op) * (v - v_star) + u_star) + amp * diffusion_weight(v_star) * xi_star;
  return {vp, vsp};
}

class Simulation {
 public:
  using SnapshotHook = std::function<void(const Ensemble&, const Observables&)>;

  explicit Simulation(ScenarioConfig cfg, unsigned threads = 1)
      : cfg_(std::move(cfg)), threads_(std::max(1u, threads)) {
    ensemble_ = initialize(cfg_);
    for (std::size_t g = 0; g < cfg_.groups.size(); ++g) policies_.push_back(policy_for(cfg_, g));
    m_v_init_ = mean_opinion(ensemble_);
    for (const auto& p : policies_) {
      if (p.contact_control_enabled) needs_rho_ = true;
      if (p.opinion_control_enabled && p.opinion.hv_argument == GateArgument::rho &&
          p.opinion.hv.kind == Activation::Kind::sigmoid)
        needs_rho_ = true;
    }
    const double eps = cfg_.sim.epsilon;
    eta_spec_ = {cfg_.sim.contact_noise, std::sqrt(eps) * cfg_.contacts.nu,
                 scaled_eta_lower_bound(cfg_.contacts, eps)};
    xi_spec_ = {cfg_.sim.opinion_noise, 1.0};
    psi_ = ScaledValueFunction(eps, cfg_.contacts);
  }

  const ScenarioConfig& config() const noexcept { return cfg_; }
  const Ensemble& ensemble() const noexcept { return ensemble_; }
  const Diagnostics& diagnostics() const noexcept { return diag_; }
  std::uint64_t steps_taken() const noexcept { return step_; }
  double time() const noexcept { return double(step_) * cfg_.sim.epsilon; }

  /// Context frozen from the current state.
  StepContext context() {
    StepContext ctx;
    ctx.epsilon = cfg_.sim.epsilon;
    ctx.step = step_;
    ctx.m_v = cfg_.sim.mv_mode == MeanOpinionMode::instantaneous ? mean_opinion(ensemble_) : m_v_init_;
    if (needs_rho_) ctx.rho = local_opinion_mass_all(ensemble_, cfg_.contact_control.r, sort_ws_);
    return ctx;
  }

  void step() {
    const StepContext ctx = context();
    const auto pairs = sample_pairs(ensemble_.size(), cfg_.sim.seed, step_);
    const std::size_t n = ensemble_.size();
    std::size_t idle = n;
    if (n % 2) {
      ++diag_.idle_agents;
      std::uint64_t paired = 0;
      for (const auto& [i, j] : pairs) paired += std::uint64_t(i) + j;
      idle = std::size_t(std::uint64_t(n) * (n - 1) / 2 - paired);
    }
    c_next_.resize(n);
    xi_.resize(n);

    // Contacts change per agent and never read the partner, so they run as a
    // flat pass into c_next_; opinions then read the pre-step contacts.
    parallel(n, [&](std::size_t lo, std::size_t hi) { return update_contacts_range(lo, hi, idle, ctx); });
    parallel(pairs.size(), [&](std::size_t lo, std::size_t hi) { return update_opinions_range(pairs, lo, hi, ctx); });
    if (idle < n) c_next_[idle] = ensemble_.c[idle];
    ensemble_.c.swap(c_next_);
    ++step_;
  }

  /// Full observables of the current state.
  Observables observe_now(bool with_histograms) const {
    const HistogramSpec spec{cfg_.output.bins_v, cfg_.output.c_range.lo, cfg_.output.c_range.hi, cfg_.output.bins_c};
    return observe(ensemble_, cfg_.groups.size(), time(), with_histograms ? &spec : nullptr);
  }

  /// Advances to t_final, recording snapshots and the means trajectory.
  RunResult run(const SnapshotHook& hook = {}) {
    const double eps = cfg_.sim.epsilon;
    const auto n_steps = static_cast<std::uint64_t>(std::llround(cfg_.sim.t_final / eps));
    std::vector<std::uint64_t> snap_steps{0};
    for (double t : cfg_.sim.snapshot_times) {
      const auto k = static_cast<std::uint64_t>(std::llround(t / eps));
      if (k != snap_steps.back()) snap_steps.push_back(std::min(k, n_steps));
    }
    const auto means_every = std::max<std::uint64_t>(1, std::uint64_t(std::llround(cfg_.output.means_interval / eps)));

    RunResult out;
    for (const auto& g : cfg_.groups) out.group_names.push_back(g.name);
    std::size_t next_snap = 0;
    auto record = [&] {
      const bool snap = next_snap < snap_steps.size() && snap_steps[next_snap] == step_;
      const bool means = snap || step_ % means_every == 0 || step_ == n_steps;
      if (!means) return;
      Observables o = observe_now(snap);
      if (snap) {
        ++next_snap;
        if (hook) hook(ensemble_, o);
        Observables lean = o;
        lean.hist = {};
        out.trajectory.push_back(std::move(lean));
        out.snapshots.push_back(std::move(o));
      } else {
        out.trajectory.push_back(std::move(o));
      }
    };
    record();
    while (step_ < n_steps) {
      step();
      record();
    }
    out.final_ensemble = ensemble_;
    out.diagnostics = diag_;
    return out;
  }

 private:
  template <class Work>
  void parallel(std::size_t count, Work&& work) {
    const std::size_t workers = std::min<std::size_t>(threads_, std::max<std::size_t>(1, count / 256));
    if (workers <= 1) {
      diag_ += work(std::size_t{0}, count);
      return;
    }
    std::vector<Diagnostics> part(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = std::min(count, w * chunk), hi = std::min(count, lo + chunk);
      pool.emplace_back([&, w, lo, hi] { part[w] = work(lo, hi); });
    }
    for (auto& t : pool) t.join();
    for (const auto& d : part) diag_ += d;
  }

  // The common case reads the contact noise and the opinion noise straight
  // from the first Philox block of the agent's lane (words 0-1 and 2-3), in
  // tiles that vectorize. Anything off that path (a truncation or floor
  // rejection, c' <= 0, two-point noise) replays the agent through the scalar
  // stream, which yields the same values by construction.
  Diagnostics update_contacts_range(std::size_t lo, std::size_t hi, std::size_t idle, const StepContext& ctx) {
    Diagnostics d;
    constexpr std::size_t kTile = 256;
    std::uint32_t w0[kTile], w1[kTile], w2[kTile], w3[kTile];
    double u_eta[kTile], z_eta[kTile], u_xi[kTile], z_xi[kTile], kappa[kTile], eta[kTile], c_new[kTile];
    bool ok[kTile];
    const auto& cp = cfg_.contacts;
    const double sigma = cfg_.opinions.sigma;
    const double floor_c = cfg_.sim.boundary.contact_floor_factor * cp.c_bar;
    const bool eta_gauss = eta_spec_.family == NoiseFamily::truncated_gaussian;
    const bool eta_draws = eta_spec_.std != 0.0;
    const bool fast = (eta_gauss || !eta_draws) && (sigma == 0.0 || xi_spec_.family == NoiseFamily::truncated_gaussian);

    for (std::size_t base = lo; base < hi; base += kTile) {
      const std::size_t m = std::min(kTile, hi - base);
      if (fast) {
        philox_first_blocks(cfg_.sim.seed, ctx.step, std::uint32_t(base), m, w0, w1, w2, w3);
        // Without contact noise the opinion draw starts at word 0.
        for (std::size_t k = 0; k < m; ++k) {
          u_eta[k] = uniform_from_words(w0[k], w1[k]);
          u_xi[k] = eta_draws ? uniform_from_words(w2[k], w3[k]) : u_eta[k];
        }
        if (eta_draws) normal_quantiles(u_eta, z_eta, m);
        if (sigma > 0.0) normal_quantiles(u_xi, z_xi, m);
      }
      // Gather, then the contact maths as a branch-light loop over the tile,
      // then write back or fall back agent by agent.
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = base + k;
        const auto& pol = policies_[ensemble_.group[i]];
        const double rho = ctx.rho.empty() ? 0.0 : ctx.rho[i];
        kappa[k] = contact_control(ensemble_.c[i], rho, pol.contact, cp, pol.contact_control_enabled);
        eta[k] = fast && eta_draws ? eta_spec_.std * z_eta[k] : 0.0;
        ok[k] = fast && i != idle &&
                (!eta_draws || (std::abs(z_eta[k]) <= eta_spec_.truncation && eta[k] >= eta_spec_.lower_bound)) &&
                (sigma == 0.0 || std::abs(z_xi[k]) <= xi_spec_.truncation);
      }
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = base + k;
        c_new[k] = ok[k] ? update_contacts(ensemble_.c[i], ensemble_.v[i], kappa[k], ctx.m_v, psi_, ctx.epsilon, cp, eta[k])
                         : 0.0;
      }
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = base + k;
        if (ok[k] && c_new[k] > 0.0) {
          c_next_[i] = c_new[k];
          xi_[i] = sigma > 0.0 ? xi_spec_.std * z_xi[k] : 0.0;
        } else if (i != idle) {
          CounterStream rng(cfg_.sim.seed, ctx.step, std::uint32_t(i));
          c_next_[i] = next_contacts(ensemble_.c[i], ensemble_.v[i], kappa[k], ctx, rng, floor_c, d);
          xi_[i] = sigma > 0.0 ? sample_noise(xi_spec_, rng).value : 0.0;
        }
      }
    }
    return d;
  }

  Diagnostics update_opinions_range(const std::vector<AgentPair>& pairs, std::size_t lo, std::size_t hi,
                                    const StepContext& ctx) {
    Diagnostics d;
    const double eps = ctx.epsilon;
    const auto& op = cfg_.opinions;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto [i, j] = pairs[k];
      const double vi = ensemble_.v[i], vj = ensemble_.v[j];
      const double ci = ensemble_.c[i], cj = ensemble_.c[j];
      const double rho_i = ctx.rho.empty() ? 0.0 : ctx.rho[i];
      const double rho_j = ctx.rho.empty() ? 0.0 : ctx.rho[j];
      const auto& pi = policies_[ensemble_.group[i]];
      const auto& pj = policies_[ensemble_.group[j]];
      const double u_i = opinion_control_full(vi, vj, ci, cj, rho_i, eps, pi.opinion, op, pi.opinion_control_enabled);
      const double u_j = opinion_control_full(vj, vi, cj, ci, rho_j, eps, pj.opinion, op, pj.opinion_control_enabled);

      if (confidence_gate(vi, vj, op.delta) == 0.0) ++d.unconfident_pairs;
      auto [vi_new, vj_new] = update_opinions_pair(vi, vj, ci, cj, u_i, u_j, eps, op, xi_[i], xi_[j]);
      ensemble_.v[i] = bound_opinion(vi_new, d);
      ensemble_.v[j] = bound_opinion(vj_new, d);
    }
    return d;
  }

  double next_contacts(double c, double v, double kappa, const StepContext& ctx, CounterStream& rng, double floor_c,
                       Diagnostics& d) const {
    auto draw = sample_noise(eta_spec_, rng);
    d.noise_resamples += std::uint64_t(draw.resamples);
    double c_new = update_contacts(c, v, kappa, ctx.m_v, psi_, ctx.epsilon, cfg_.contacts, draw.value);
    for (int r = 0; !(c_new > 0.0) && r < cfg_.sim.boundary.contact_resample_max; ++r) {
      ++d.contact_resamples;
      draw = sample_noise(eta_spec_, rng);
      d.noise_resamples += std::uint64_t(draw.resamples);
      c_new = update_contacts(c, v, kappa, ctx.m_v, psi_, ctx.epsilon, cfg_.contacts, draw.value);
    }
    if (!(c_new > 0.0)) {
      ++d.contact_clamps;
      c_new = floor_c;
    }
    return c_new;
  }

  double bound_opinion(double v, Diagnostics& d) const {
    if (v >= -1.0 && v <= 1.0) return v;
    ++d.opinion_clamps;
    if (cfg_.sim.boundary.opinion == OpinionBoundary::reflect) {
      if (v > 1.0) v = 2.0 - v;
      if (v < -1.0) v = -2.0 - v;
    }
    return std::clamp(v, -1.0, 1.0);
  }

  ScenarioConfig cfg_;
  unsigned threads_;
  Ensemble ensemble_;
  std::vector<ControlPolicy> policies_;
  double m_v_init_ = 0.0;
  bool needs_rho_ = false;
  OpinionSortWorkspace sort_ws_{};
  NoiseSpec eta_spec_{};
  NoiseSpec xi_spec_{};
  ScaledValueFunction psi_{};
  Diagnostics diag_{};
  std::uint64_t step_ = 0;
  std::vector<double> c_next_;  // post-step contacts
  std::vector<double> xi_;      // this step's opinion noise per agent
};

/// Convenience wrapper: initialize and run a scenario.
inline RunResult run(const ScenarioConfig& cfg, unsigned threads = 1, const Simulation::SnapshotHook& hook = {}) {
  Simulation sim(cfg, threads);
  return sim.run(hook);
}

}  // namespace popnet

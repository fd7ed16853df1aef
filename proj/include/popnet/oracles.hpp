#pragma once

// Independent reference computations used to validate the simulator: the
// stationary law of log-contacts in the small-increment limit, brute-force
// minimization of the one-step control costs, an O(n^2) local-mass count and
// the epsilon -> 0 convergence of the scaled value function and control.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "popnet/control.hpp"
#include "popnet/engine.hpp"
#include "popnet/model.hpp"
#include "popnet/noise.hpp"
#include "popnet/params.hpp"
#include "popnet/rng.hpp"
#include "popnet/stats.hpp"

namespace popnet::oracles {

struct SteadyStatePrediction {
  double mean_log_c = 0.0;
  double var_log_c = 0.0;
};

/// Stationary moments of y = ln c when opinions, Phi and kappa are frozen.
///
/// In the limit the contact law is dc = -[(mu/2) ln(c/c_bar) + beta (phi0 - kappa0)] c dt + nu c dW,
/// so by Ito dy = -(mu/2) [y - ln c_bar + (2/mu)(beta (phi0 - kappa0) + nu^2/2)] dt + nu dW:
/// an Ornstein-Uhlenbeck process with rate mu/2 and stationary variance nu^2/mu.
inline SteadyStatePrediction predict_log_contact_steady_state(const ContactParams& p, double phi0, double kappa0) {
  if (!(p.mu > 0.0)) throw std::domain_error("steady state requires mu > 0 (no mean reversion otherwise)");
  if (!(p.beta > 0.0)) throw std::domain_error("steady state requires beta > 0");
  SteadyStatePrediction out;
  out.mean_log_c = std::log(p.c_bar) - (2.0 / p.mu) * (p.beta * (phi0 - kappa0) + 0.5 * p.nu * p.nu);
  out.var_log_c = p.nu * p.nu / p.mu;
  return out;
}

inline std::vector<double> uniform_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[std::size_t(k)] = points == 1 ? lo : lo + (hi - lo) * double(k) / (points - 1);
  return g;
}

/// Standard-normal draws (truncated at 6 sd) shared across grid points.
inline std::vector<double> common_draws(std::size_t count, std::uint64_t seed) {
  std::vector<double> z(count);
  CounterStream rng(seed, 0, 0);
  const NoiseSpec unit{NoiseFamily::truncated_gaussian, 1.0};
  for (auto& x : z) x = sample_noise(unit, rng).value;
  return z;
}

struct ContactCostState {
  double c = 100.0;
  double v = 0.0;
  double m_v = 0.0;
  double rho = 0.5;
  double epsilon = 1e-3;
};

/// Grid minimizer of the Monte Carlo one-step contact cost
///   J(kappa) = E[-lambda (c' - c)/c R_c H_c] + (eps gamma_c / 2) kappa^2
/// with c' from the scaled controlled update.
inline double brute_force_contact_cost(const ContactCostState& s, const std::vector<double>& kappa_grid,
                                       const ContactParams& cp, const ContactControlParams& cc,
                                       std::size_t noise_draws, std::uint64_t seed = 17) {
  if (kappa_grid.empty()) throw std::invalid_argument("brute_force_contact_cost: empty grid");
  const auto z = common_draws(noise_draws, seed);
  const double sd = std::sqrt(s.epsilon) * cp.nu;
  const double gates = sigmoid_rc(s.c, cc) * sigmoid_hc(s.rho, cc);
  const double drift = scaled_value_function(s.c / cp.c_bar, s.epsilon, cp) + opinion_penalty(s.v, s.m_v, cp);
  double best = kappa_grid.front(), best_cost = INFINITY;
  for (double kappa : kappa_grid) {
    CompensatedSum acc;
    for (double zk : z) {
      const double c_next = s.c * (1.0 - s.epsilon * cp.beta * (drift - kappa) + sd * zk);
      acc.add(-cc.lambda * (c_next - s.c) / s.c * gates);
    }
    const double cost = acc.value() / double(z.size()) + 0.5 * s.epsilon * cc.gamma_c * kappa * kappa;
    if (cost < best_cost) {
      best_cost = cost;
      best = kappa;
    }
  }
  return best;
}

struct OpinionCostState {
  double v = 0.0, v_star = 0.0;
  double c = 100.0, c_star = 100.0;
  double rho = 0.5;
  double epsilon = 1e-3;
};

/// Grid minimizer of the Monte Carlo one-step opinion cost
///   V(u) = E[(1/2)(v' - v_target)^2 R_v H_v] + (gamma_v / 2) eps alpha u^2
/// with v' from the scaled binary rule.
inline double brute_force_opinion_cost(const OpinionCostState& s, const std::vector<double>& u_grid,
                                       const OpinionControlParams& oc, const OpinionParams& op,
                                       std::size_t noise_draws, std::uint64_t seed = 23) {
  if (u_grid.empty()) throw std::invalid_argument("brute_force_opinion_cost: empty grid");
  const auto z = common_draws(noise_draws, seed);
  const double ea = s.epsilon * op.alpha;
  const double amp = std::sqrt(s.epsilon) * op.sigma * diffusion_weight(s.v);
  const double gates = opinion_gate(s.v, s.c, s.rho, oc);
  const double pull = compromise(s.v, s.v_star, s.c, s.c_star, op) * (s.v_star - s.v);
  double best = u_grid.front(), best_cost = INFINITY;
  for (double u : u_grid) {
    CompensatedSum acc;
    for (double zk : z) {
      const double dv = s.v + ea * (pull + u) + amp * zk - oc.v_target;
      acc.add(0.5 * dv * dv * gates);
    }
    const double cost = acc.value() / double(z.size()) + 0.5 * oc.gamma_v * ea * u * u;
    if (cost < best_cost) {
      best_cost = cost;
      best = u;
    }
  }
  return best;
}

/// O(n^2) reference for the local opinion mass.
inline std::vector<double> brute_force_rho(const Ensemble& e, double r) {
  const std::size_t n = e.size();
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(e.v[j] - e.v[i]) <= r) ++k;
    rho[i] = double(k) / double(n);
  }
  return rho;
}

struct ScalingRow {
  double epsilon = 0.0;
  double psi_error = 0.0;      // max over the s grid of |Psi^eps - limit|
  double control_error = 0.0;  // max over the state grid of |u_full - u_limit|
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<double> psi_orders;      // empirical orders between consecutive rows
  std::vector<double> control_orders;
};

/// Opinion-control test state for the scaling study.
struct ControlState {
  double v, v_star, c, c_star, rho;
};

/// log(e_k / e_{k+1}) / log(eps_k / eps_{k+1}); NaN when either error is zero.
inline double empirical_order(double e0, double e1, double eps0, double eps1) {
  if (e0 == 0.0 || e1 == 0.0) return std::nan("");
  return std::log(e0 / e1) / std::log(eps0 / eps1);
}

inline ScalingReport scaling_consistency_report(const std::vector<double>& s_grid, const std::vector<double>& eps_list,
                                                const ContactParams& cp, const std::vector<ControlState>& states,
                                                const OpinionControlParams& oc, const OpinionParams& op) {
  for (std::size_t k = 1; k < eps_list.size(); ++k)
    if (!(eps_list[k] < eps_list[k - 1])) throw std::invalid_argument("scaling report: epsilon list must decrease");
  ScalingReport rep;
  for (double eps : eps_list) {
    ScalingRow row{eps, 0.0, 0.0};
    for (double s : s_grid)
      row.psi_error = std::max(row.psi_error, std::abs(scaled_value_function(s, eps, cp) - limit_value_function(s, cp)));
    for (const auto& st : states) {
      const double full = opinion_control_full(st.v, st.v_star, st.c, st.c_star, st.rho, eps, oc, op);
      const double lim = opinion_control_limit(st.v, st.c, st.rho, oc);
      row.control_error = std::max(row.control_error, std::abs(full - lim));
    }
    rep.rows.push_back(row);
  }
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto &a = rep.rows[k - 1], &b = rep.rows[k];
    rep.psi_orders.push_back(empirical_order(a.psi_error, b.psi_error, a.epsilon, b.epsilon));
    rep.control_orders.push_back(empirical_order(a.control_error, b.control_error, a.epsilon, b.epsilon));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Validation suites shared by the CLI and the acceptance tests.

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<std::string> csv_rows;  // "check,quantity,oracle,observed"
};

inline std::string num(double x) {
  std::ostringstream os;
  os.precision(9);
  os << x;
  return os.str();
}

/// Contact-only relaxation against the log-normal steady state.
struct SteadyStateSetup {
  ContactParams contacts{1.0, 0.1, 200.0, 0.0, 0.1, 0.1};
  std::int64_t n_particles = 100000;
  double dt = 1e-2;
  double t_final = 200.0;
  std::uint64_t seed = 2024;
  double mean_tolerance = 0.05;    // absolute, on E[ln c]
  double var_rel_tolerance = 0.10; // relative, on Var[ln c]
};

inline ScenarioConfig steady_state_scenario(const SteadyStateSetup& s) {
  ScenarioConfig cfg;
  cfg.name = "steady_state_oracle";
  cfg.contacts = s.contacts;
  cfg.opinions.alpha = 0.0;
  cfg.opinions.sigma = 0.0;
  GroupSpec g;
  g.name = "all";
  g.fraction = 1.0;
  g.init_c = {0.5 * s.contacts.c_bar, 1.5 * s.contacts.c_bar};
  g.init_v = {-0.5, 0.5};
  cfg.groups = {g};
  cfg.sim.epsilon = s.dt;
  cfg.sim.t_final = s.t_final;
  cfg.sim.n_particles = s.n_particles;
  cfg.sim.seed = s.seed;
  cfg.output.means_interval = s.t_final;
  return cfg;
}

inline CheckResult check_steady_state(const SteadyStateSetup& setup = {}, unsigned threads = 1) {
  CheckResult res{"steady-state"};
  const auto cfg = steady_state_scenario(setup);
  const auto run_out = run(cfg, threads);
  const auto& c = run_out.final_ensemble.c;
  CompensatedSum s1;
  for (double x : c) s1.add(std::log(x));
  const double mean = s1.value() / double(c.size());
  CompensatedSum s2;
  for (double x : c) s2.add((std::log(x) - mean) * (std::log(x) - mean));
  const double var = s2.value() / double(c.size() - 1);
  const auto pred = predict_log_contact_steady_state(cfg.contacts, 0.0, 0.0);
  const bool mean_ok = std::abs(mean - pred.mean_log_c) <= setup.mean_tolerance;
  const bool var_ok = std::abs(var - pred.var_log_c) <= setup.var_rel_tolerance * pred.var_log_c;
  res.passed = mean_ok && var_ok;
  res.detail = "E[ln c] " + num(mean) + " vs " + num(pred.mean_log_c) + " (tol " + num(setup.mean_tolerance) +
               "), Var[ln c] " + num(var) + " vs " + num(pred.var_log_c) + " (rel tol " +
               num(setup.var_rel_tolerance) + ")";
  res.csv_rows.push_back("steady-state,mean_log_c," + num(pred.mean_log_c) + "," + num(mean));
  res.csv_rows.push_back("steady-state,var_log_c," + num(pred.var_log_c) + "," + num(var));
  return res;
}

struct MinimizerSetup {
  int states = 50;
  int grid_points = 201;
  std::size_t noise_draws = 100000;
  std::uint64_t seed = 99;
};

/// Closed-form kappa* against the brute-force contact-cost minimizer.
inline CheckResult check_contact_minimizer(const MinimizerSetup& setup = {}) {
  CheckResult res{"minimizer-contacts"};
  CounterStream rng(setup.seed, 1, 0);
  int ok = 0;
  double worst_cells = 0.0;
  for (int k = 0; k < setup.states; ++k) {
    ContactParams cp;
    cp.mu = 0.3 * rng.uniform();
    ContactControlParams cc;
    cc.lambda = 0.2 + 1.8 * rng.uniform();
    cc.gamma_c = 0.5 + 9.5 * rng.uniform();
    ContactCostState s;
    s.c = 10.0 + 290.0 * rng.uniform();
    s.v = -1.0 + 2.0 * rng.uniform();
    s.m_v = -0.5 + rng.uniform();
    s.rho = rng.uniform();
    s.epsilon = std::exp(std::log(1e-3) * rng.uniform());
    const double hi = 2.0 * cc.lambda * cp.beta / cc.gamma_c;
    const auto grid = uniform_grid(0.0, hi, setup.grid_points);
    const double cell = hi / (setup.grid_points - 1);
    const double closed = contact_control(s.c, s.rho, cc, cp);
    const double brute = brute_force_contact_cost(s, grid, cp, cc, setup.noise_draws, setup.seed + std::uint64_t(k));
    const double cells = std::abs(brute - closed) / cell;
    worst_cells = std::max(worst_cells, cells);
    if (cells <= 1.0) ++ok;
    res.csv_rows.push_back("minimizer-contacts,kappa_state" + std::to_string(k) + "," + num(closed) + "," + num(brute));
  }
  res.passed = ok == setup.states;
  res.detail = std::to_string(ok) + "/" + std::to_string(setup.states) + " states within one grid cell (worst " +
               num(worst_cells) + " cells)";
  return res;
}

/// Closed-form u* against the brute-force opinion-cost minimizer.
inline CheckResult check_opinion_minimizer(const MinimizerSetup& setup = {}) {
  CheckResult res{"minimizer-opinions"};
  CounterStream rng(setup.seed, 2, 0);
  int ok = 0;
  double worst_cells = 0.0;
  for (int k = 0; k < setup.states; ++k) {
    OpinionParams op;
    op.delta = 0.2 + 1.8 * rng.uniform();
    op.p = 3.0 * rng.uniform();
    OpinionControlParams oc;
    const double gammas[] = {1.0, 10.0, 100.0};
    oc.gamma_v = gammas[rng.below(3)];
    oc.v_target = -1.0 + 2.0 * rng.uniform();
    if (rng.below(2)) oc.rv = {Activation::Kind::sigmoid, 1.0, 100.0, -0.1};
    if (rng.below(2)) oc.hv = {Activation::Kind::sigmoid, 1.0, 0.5, 0.1};
    OpinionCostState s;
    s.v = -1.0 + 2.0 * rng.uniform();
    s.v_star = -1.0 + 2.0 * rng.uniform();
    s.c = 10.0 + 290.0 * rng.uniform();
    s.c_star = 10.0 + 290.0 * rng.uniform();
    s.rho = rng.uniform();
    s.epsilon = std::exp(std::log(1e-3) * rng.uniform());
    // Bracket from the a-priori bound |u*| <= G (|v| + |v_target| + ea |v_star - v|) / gamma_v.
    const double gate = opinion_gate(s.v, s.c, s.rho, oc);
    const double bound = 1.25 * gate * (2.0 + 2.0 * s.epsilon * op.alpha) / oc.gamma_v + 1e-12;
    const auto grid = uniform_grid(-bound, bound, setup.grid_points);
    const double cell = 2.0 * bound / (setup.grid_points - 1);
    const double closed = opinion_control_full(s.v, s.v_star, s.c, s.c_star, s.rho, s.epsilon, oc, op);
    const double brute = brute_force_opinion_cost(s, grid, oc, op, setup.noise_draws, setup.seed + std::uint64_t(k));
    const double cells = std::abs(brute - closed) / cell;
    worst_cells = std::max(worst_cells, cells);
    if (cells <= 1.0) ++ok;
    res.csv_rows.push_back("minimizer-opinions,u_state" + std::to_string(k) + "," + num(closed) + "," + num(brute));
  }
  res.passed = ok == setup.states;
  res.detail = std::to_string(ok) + "/" + std::to_string(setup.states) + " states within one grid cell (worst " +
               num(worst_cells) + " cells)";
  return res;
}

struct ScalingSetup {
  double mu = 0.1;
  double order_target = 1.0;
  double order_tolerance = 0.4;
  std::vector<double> epsilons{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
};

/// Convergence order of Psi^eps and of the opinion control as eps -> 0.
/// Passes trivially when every error is exactly zero (e.g. mu = 0 for Psi).
inline CheckResult check_scaling(const ScalingSetup& setup = {}) {
  CheckResult res{"scaling"};
  ContactParams cp;
  cp.mu = setup.mu;
  const auto s_grid = uniform_grid(0.1, 10.0, 100);
  std::vector<ControlState> states;
  for (double v : {-0.9, -0.3, 0.2, 0.8})
    for (double vs : {-0.5, 0.1, 0.6}) states.push_back({v, vs, 120.0, 80.0, 0.5});
  OpinionControlParams oc;
  OpinionParams op;
  op.delta = 2.0;
  const auto rep = scaling_consistency_report(s_grid, setup.epsilons, cp, states, oc, op);

  auto orders_ok = [&](const std::vector<double>& orders, const char* what, std::string& msg) {
    bool ok = true;
    int counted = 0;
    for (double q : orders) {
      if (std::isnan(q)) continue;
      ++counted;
      if (std::abs(q - setup.order_target) > setup.order_tolerance) ok = false;
    }
    msg += std::string(what) + " orders [";
    for (std::size_t k = 0; k < orders.size(); ++k) msg += (k ? " " : "") + num(orders[k]);
    msg += "]";
    if (counted == 0) msg += " (all errors zero)";
    return ok;
  };
  bool all_zero_psi = true;
  for (const auto& row : rep.rows) {
    all_zero_psi = all_zero_psi && row.psi_error == 0.0;
    res.csv_rows.push_back("scaling,psi_error_eps" + num(row.epsilon) + ",0," + num(row.psi_error));
    res.csv_rows.push_back("scaling,control_error_eps" + num(row.epsilon) + ",0," + num(row.control_error));
  }
  std::string msg;
  const bool psi_ok = all_zero_psi || orders_ok(rep.psi_orders, "Psi", msg);
  if (all_zero_psi) msg += "Psi errors all zero";
  msg += "; ";
  const bool ctl_ok = orders_ok(rep.control_orders, "control", msg);
  res.passed = psi_ok && ctl_ok;
  res.detail = msg;
  return res;
}

}  // namespace popnet::oracles

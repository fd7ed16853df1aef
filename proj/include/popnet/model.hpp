#pragma once

// Elementary model functions: value functions of the contact ratio, opinion
// penalty, compromise kernel, diffusion weight, activation sigmoids and the
// admissibility floor of the contact noise.

#include <cmath>
#include <stdexcept>

#include "popnet/params.hpp"

namespace popnet {

/// Prospect-type value function of s = c / c_bar. Increasing, zero at s = 1,
/// bounded in [-(mu/(1-mu))/beta, (mu/(1+mu))/beta].
inline double value_function(double s, const ContactParams& p) {
  const double a = p.mu / (1.0 - p.mu);
  const double b = (1.0 + p.mu) / (1.0 - p.mu);
  return a * (s - 1.0) / (b * s + 1.0) / p.beta;
}

/// Value function under the small-increment scaling with its constants
/// hoisted, for evaluation once per agent per step.
struct ScaledValueFunction {
  double a = 0.0, b = 0.0, beta_eps = 1.0;
  bool zero = true;

  ScaledValueFunction() = default;
  ScaledValueFunction(double epsilon, const ContactParams& p) {
    if (!(epsilon > 0.0)) throw std::domain_error("scaled_value_function: epsilon must be positive");
    zero = p.mu == 0.0;
    a = p.mu / (1.0 - p.mu);
    b = (1.0 + p.mu) / (1.0 - p.mu);
    beta_eps = p.beta * epsilon;
    eps_ = epsilon;
  }

  double operator()(double s) const {
    if (!(s > 0.0)) throw std::domain_error("scaled_value_function: contact ratio must be positive");
    if (zero) return 0.0;
    // s^eps - 1 without cancellation for eps * ln s small.
    const double se_m1 = std::expm1(eps_ * std::log(s));
    return a * se_m1 / (b * (se_m1 + 1.0) + 1.0) / beta_eps;
  }

 private:
  double eps_ = 1.0;
};

/// Tends to limit_value_function as epsilon -> 0.
inline double scaled_value_function(double s, double epsilon, const ContactParams& p) {
  return ScaledValueFunction(epsilon, p)(s);
}

/// (mu / (2 beta)) ln s; equals (mu/2) ln s for beta = 1.
inline double limit_value_function(double s, const ContactParams& p) {
  if (!(s > 0.0)) throw std::domain_error("limit_value_function: contact ratio must be positive");
  return 0.5 * p.mu * std::log(s) / p.beta;
}

/// theta ((v - m_v)^2 - delta_phi^2): negative inside the tolerance band.
inline double opinion_penalty(double v, double m_v, const ContactParams& p) {
  const double d = v - m_v;
  return p.theta * (d * d - p.delta_phi * p.delta_phi);
}

inline double diffusion_weight(double v) { return 1.0 - v * v; }

/// K(c, c_star) = c_star^p / (c^p + c_star^p), evaluated in ratio form so it
/// survives contacts that have decayed far below 1.
inline double connectivity_weight(double c, double c_star, double p) {
  if (p == 0.0) return 0.5;
  if (c == 0.0 && c_star == 0.0)
    throw std::domain_error("connectivity_weight: undefined for c = c_star = 0 with p > 0");
  if (c_star == 0.0) return 0.0;
  if (c == 0.0) return 1.0;
  const double x = c / c_star;
  double xp;
  if (p == 1.0) xp = x;
  else if (p == 2.0) xp = x * x;
  else if (p == 3.0) xp = x * x * x;
  else if (p == 4.0) xp = (x * x) * (x * x);
  else xp = std::pow(x, p);
  return 1.0 / (1.0 + xp);
}

/// Bounded-confidence indicator; strict inequality.
inline double confidence_gate(double v, double v_star, double delta) {
  return std::abs(v - v_star) < delta ? 1.0 : 0.0;
}

/// Compromise weight P = H(v, v_star) K(c, c_star) in [0, 1].
inline double compromise(double v, double v_star, double c, double c_star, const OpinionParams& op) {
  if (confidence_gate(v, v_star, op.delta) == 0.0) {
    if (op.p > 0.0 && c == 0.0 && c_star == 0.0)
      throw std::domain_error("compromise: undefined for c = c_star = 0 with p > 0");
    return 0.0;
  }
  return connectivity_weight(c, c_star, op.p);
}

/// R_c: close to 1 below c_min, decreasing in c.
inline double sigmoid_rc(double c, const ContactControlParams& cc) {
  return 1.0 / (1.0 + std::exp(-cc.alpha_r * (cc.c_min - c)));
}

/// H_c: increasing in the local opinion mass, 1/2 at rho_star.
inline double sigmoid_hc(double rho, const ContactControlParams& cc) {
  return 1.0 / (1.0 + std::exp(-cc.alpha_h * (rho - cc.rho_star)));
}

/// Lower bound on the unscaled contact noise that keeps c' >= 0 under the
/// worst-case drift.
inline double eta_lower_bound(const ContactParams& p) {
  return (p.beta * p.theta * (4.0 - p.delta_phi * p.delta_phi) * (1.0 + p.mu) - 1.0) / (1.0 + p.mu);
}

/// Same bound for the epsilon-scaled update, where the penalty term carries a
/// factor epsilon and epsilon*beta*Psi^eps stays below mu/(1+mu). Reduces to
/// eta_lower_bound at epsilon = 1.
inline double scaled_eta_lower_bound(const ContactParams& p, double epsilon) {
  return (epsilon * p.beta * p.theta * (4.0 - p.delta_phi * p.delta_phi) * (1.0 + p.mu) - 1.0) / (1.0 + p.mu);
}

}  // namespace popnet

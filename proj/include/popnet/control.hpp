#pragma once

// Closed-form instantaneous feedback controls for contacts and opinions.

#include "popnet/model.hpp"
#include "popnet/params.hpp"

namespace popnet {

/// Per-group control switches and parameters.
struct ControlPolicy {
  bool contact_control_enabled = false;
  bool opinion_control_enabled = false;
  ContactControlParams contact{};
  OpinionControlParams opinion{};
};

inline ControlPolicy policy_for(const ScenarioConfig& cfg, std::size_t group) {
  const auto& g = cfg.groups.at(group);
  return {g.contact_control_enabled, g.opinion_control_enabled, cfg.contact_control, g.opinion_control};
}

/// kappa* = lambda (beta / gamma_c) R_c(c) H_c(rho); zero when disabled.
inline double contact_control(double c, double rho, const ContactControlParams& cc, const ContactParams& cp,
                              bool enabled = true) {
  if (!enabled) return 0.0;
  return cc.lambda * (cp.beta / cc.gamma_c) * sigmoid_rc(c, cc) * sigmoid_hc(rho, cc);
}

/// Product R_v(c) H_v(.) of the opinion-control gates.
inline double opinion_gate(double v, double c, double rho, const OpinionControlParams& oc) {
  const double h_arg = oc.hv_argument == GateArgument::rho ? rho : v;
  return oc.rv(c) * oc.hv(h_arg);
}

/// Minimizer of the one-step opinion cost under the epsilon-scaled binary
/// rule (alpha replaced by epsilon*alpha):
///   u* = -G [v + ea P (v_star - v) - v_target] / (gamma_v + ea G),  G = R_v H_v.
inline double opinion_control_full(double v, double v_star, double c, double c_star, double rho, double epsilon,
                                   const OpinionControlParams& oc, const OpinionParams& op, bool enabled = true) {
  if (!enabled) return 0.0;
  const double gate = opinion_gate(v, c, rho, oc);
  if (gate == 0.0) return 0.0;
  const double ea = epsilon * op.alpha;
  const double pull = compromise(v, v_star, c, c_star, op) * (v_star - v);
  return -gate * (v + ea * pull - oc.v_target) / (oc.gamma_v + ea * gate);
}

/// epsilon -> 0 limit: -R_v(c) H_v (v - v_target) / gamma_v.
inline double opinion_control_limit(double v, double c, double rho, const OpinionControlParams& oc) {
  return -opinion_gate(v, c, rho, oc) * (v - oc.v_target) / oc.gamma_v;
}

}  // namespace popnet

#pragma once

// Parameter blocks for the coupled opinion/contact model and the scenario
// description that bundles them. Defaults are the reference parameter set
// used by the shipped experiments.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace popnet {

/// Raised when a scenario violates a schema rule or a parameter bound.
/// `field()` names the offending key path (e.g. "contacts.mu").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct ContactParams {
  double beta = 1.0;       // interaction strength
  double mu = 0.0;         // value-function asymmetry, [0,1)
  double c_bar = 200.0;    // reference contact level
  double theta = 2.0;      // opinion-penalty strength
  double delta_phi = 0.1;  // opinion tolerance radius
  double nu = 0.1;         // contact noise std
  friend bool operator==(const ContactParams&, const ContactParams&) = default;
};

struct ContactControlParams {
  double lambda = 1.0;
  double gamma_c = 1.0;
  double alpha_r = 0.1;
  double alpha_h = 0.1;
  double c_min = 100.0;
  double r = 0.7;
  double rho_star = 0.5;
  friend bool operator==(const ContactControlParams&, const ContactControlParams&) = default;
};

struct OpinionParams {
  double alpha = 1.0;
  double delta = 0.8;  // bounded-confidence radius
  double p = 3.0;      // connectivity-influence exponent
  double sigma = 0.1;
  friend bool operator==(const OpinionParams&, const OpinionParams&) = default;
};

/// Activation gate used by the opinion control: either a constant or the
/// logistic 1/(1+exp(-steepness*(x-threshold))). A negative steepness gives
/// a decreasing gate, as for the contact-control gate R_c.
struct Activation {
  enum class Kind { constant, sigmoid };
  Kind kind = Kind::constant;
  double value = 1.0;
  double threshold = 0.0;
  double steepness = 1.0;

  double operator()(double x) const {
    if (kind == Kind::constant) return value;
    return 1.0 / (1.0 + std::exp(-steepness * (x - threshold)));
  }
  friend bool operator==(const Activation&, const Activation&) = default;
};

/// Which state variable feeds the opinion gate H_v.
enum class GateArgument { rho, opinion };

struct OpinionControlParams {
  double gamma_v = 10.0;
  double v_target = 0.5;
  Activation rv{};  // function of contacts
  Activation hv{};  // function of local mass (default) or opinion
  GateArgument hv_argument = GateArgument::rho;
  friend bool operator==(const OpinionControlParams&, const OpinionControlParams&) = default;
};

struct GroupSpec {
  std::string name = "all";
  double fraction = 1.0;
  Range init_c{50.0, 100.0};
  Range init_v{-0.8, 0.8};
  bool contact_control_enabled = false;
  bool opinion_control_enabled = false;
  OpinionControlParams opinion_control{};
  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

enum class MeanOpinionMode { instantaneous, frozen_at_init };
enum class NoiseFamily { truncated_gaussian, two_point };
enum class OpinionBoundary { clamp, reflect };

struct BoundaryPolicy {
  OpinionBoundary opinion = OpinionBoundary::clamp;
  int contact_resample_max = 8;
  double contact_floor_factor = 1e-6;  // floor = factor * c_bar
  friend bool operator==(const BoundaryPolicy&, const BoundaryPolicy&) = default;
};

struct SimParams {
  double epsilon = 1e-3;  // also the time step
  double t_final = 50.0;
  std::int64_t n_particles = 10000;
  std::uint64_t seed = 1;
  std::vector<double> snapshot_times{};
  MeanOpinionMode mv_mode = MeanOpinionMode::instantaneous;
  BoundaryPolicy boundary{};
  NoiseFamily contact_noise = NoiseFamily::truncated_gaussian;
  NoiseFamily opinion_noise = NoiseFamily::truncated_gaussian;
  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct OutputParams {
  int bins_v = 100;
  int bins_c = 80;
  Range c_range{1e-1, 1e3};
  double means_interval = 0.1;  // spacing of the means time series
  friend bool operator==(const OutputParams&, const OutputParams&) = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  ContactParams contacts{};
  ContactControlParams contact_control{};
  OpinionParams opinions{};
  OpinionControlParams opinion_control{};  // defaults inherited by groups
  std::vector<GroupSpec> groups{GroupSpec{}};
  SimParams sim{};
  OutputParams output{};
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

namespace detail {

inline std::string fmt_num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline void require(bool ok, const std::string& field, const std::string& bound, double value) {
  if (!ok) throw ConfigError(field, "violates " + bound + " (got " + fmt_num(value) + ")");
}

inline void require_finite(double x, const std::string& field) {
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
}

inline void validate_activation(const Activation& a, const std::string& field) {
  require_finite(a.value, field + ".value");
  require_finite(a.threshold, field + ".threshold");
  require_finite(a.steepness, field + ".steepness");
  if (a.kind == Activation::Kind::sigmoid)
    require(a.steepness != 0.0, field + ".steepness", "steepness != 0", a.steepness);
}

inline void validate_opinion_control(const OpinionControlParams& o, const std::string& path) {
  require(o.gamma_v > 0.0, path + ".gamma_v", "gamma_v > 0", o.gamma_v);
  require(std::abs(o.v_target) <= 1.0, path + ".v_target", "|v_target| <= 1", o.v_target);
  validate_activation(o.rv, path + ".rv");
  validate_activation(o.hv, path + ".hv");
}

}  // namespace detail

/// Number of agents assigned to each group: round(fraction*n) for all but the
/// last group, which absorbs the remainder.
inline std::vector<std::int64_t> group_sizes(const ScenarioConfig& cfg) {
  std::vector<std::int64_t> sizes;
  std::int64_t assigned = 0;
  for (std::size_t g = 0; g + 1 < cfg.groups.size(); ++g) {
    auto k = static_cast<std::int64_t>(std::llround(cfg.groups[g].fraction * double(cfg.sim.n_particles)));
    sizes.push_back(k);
    assigned += k;
  }
  sizes.push_back(cfg.sim.n_particles - assigned);
  return sizes;
}

/// Throws ConfigError on the first violated invariant.
inline void validate(const ScenarioConfig& cfg) {
  using detail::require;
  const auto& cp = cfg.contacts;
  require(cp.beta > 0.0, "contacts.beta", "beta > 0", cp.beta);
  require(cp.mu >= 0.0 && cp.mu < 1.0, "contacts.mu", "0 <= mu < 1", cp.mu);
  require(cp.c_bar > 0.0, "contacts.c_bar", "c_bar > 0", cp.c_bar);
  require(cp.theta >= 0.0, "contacts.theta", "theta >= 0", cp.theta);
  require(cp.delta_phi >= 0.0 && cp.delta_phi <= 2.0, "contacts.delta_phi", "0 <= delta_phi <= 2", cp.delta_phi);
  require(cp.nu >= 0.0, "contacts.nu", "nu >= 0", cp.nu);
  for (double x : {cp.beta, cp.mu, cp.c_bar, cp.theta, cp.delta_phi, cp.nu}) detail::require_finite(x, "contacts");

  const auto& cc = cfg.contact_control;
  require(cc.lambda >= 0.0, "contact_control.lambda", "lambda >= 0", cc.lambda);
  require(cc.gamma_c > 0.0, "contact_control.gamma_c", "gamma_c > 0", cc.gamma_c);
  require(cc.alpha_r > 0.0, "contact_control.alpha_r", "alpha_r > 0", cc.alpha_r);
  require(cc.alpha_h > 0.0, "contact_control.alpha_h", "alpha_h > 0", cc.alpha_h);
  require(cc.r > 0.0, "contact_control.r", "r > 0", cc.r);
  require(cc.rho_star >= 0.0 && cc.rho_star <= 1.0, "contact_control.rho_star", "0 <= rho_star <= 1", cc.rho_star);
  detail::require_finite(cc.c_min, "contact_control.c_min");

  const auto& op = cfg.opinions;
  require(op.alpha >= 0.0, "opinions.alpha", "alpha >= 0", op.alpha);
  require(op.delta > 0.0 && op.delta <= 2.0, "opinions.delta", "0 < delta <= 2", op.delta);
  require(op.p >= 0.0, "opinions.p", "p >= 0", op.p);
  require(op.sigma >= 0.0, "opinions.sigma", "sigma >= 0", op.sigma);

  detail::validate_opinion_control(cfg.opinion_control, "opinion_control");

  if (cfg.groups.empty()) throw ConfigError("groups", "at least one group is required");
  double total = 0.0;
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    const auto& gs = cfg.groups[g];
    const std::string path = "groups[" + std::to_string(g) + "]";
    require(gs.fraction > 0.0 && gs.fraction <= 1.0, path + ".fraction", "0 < fraction <= 1", gs.fraction);
    require(gs.init_v.lo <= gs.init_v.hi, path + ".init_v", "lo <= hi", gs.init_v.lo);
    require(gs.init_v.lo >= -1.0 && gs.init_v.hi <= 1.0, path + ".init_v", "range within [-1,1]",
            gs.init_v.lo < -1.0 ? gs.init_v.lo : gs.init_v.hi);
    require(gs.init_c.lo <= gs.init_c.hi, path + ".init_c", "lo <= hi", gs.init_c.lo);
    require(gs.init_c.lo > 0.0 && std::isfinite(gs.init_c.hi), path + ".init_c", "range within (0,inf)", gs.init_c.lo);
    detail::validate_opinion_control(gs.opinion_control, path + ".opinion_control");
    total += gs.fraction;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("groups", "fractions must sum to 1 (got " + detail::fmt_num(total) + ")");

  const auto& sp = cfg.sim;
  require(sp.epsilon > 0.0 && sp.epsilon < 1.0, "sim.epsilon", "0 < epsilon < 1", sp.epsilon);
  require(sp.t_final >= 0.0 && std::isfinite(sp.t_final), "sim.t_final", "t_final >= 0", sp.t_final);
  require(sp.n_particles >= 2, "sim.n_particles", "n_particles >= 2", double(sp.n_particles));
  for (std::size_t i = 0; i < sp.snapshot_times.size(); ++i) {
    double t = sp.snapshot_times[i];
    require(t >= 0.0 && t <= sp.t_final, "sim.snapshot_times", "times within [0, t_final]", t);
    if (i > 0) require(t > sp.snapshot_times[i - 1], "sim.snapshot_times", "sorted and unique", t);
  }
  require(sp.boundary.contact_resample_max >= 0, "sim.boundary.contact_resample_max", ">= 0",
          sp.boundary.contact_resample_max);
  require(sp.boundary.contact_floor_factor > 0.0, "sim.boundary.contact_floor_factor", "> 0",
          sp.boundary.contact_floor_factor);
  for (auto k : group_sizes(cfg))
    require(k >= 1, "groups", "every group must receive at least one agent", double(k));

  const auto& out = cfg.output;
  require(out.bins_v >= 1, "output.bins_v", "bins_v >= 1", out.bins_v);
  require(out.bins_c >= 1, "output.bins_c", "bins_c >= 1", out.bins_c);
  require(out.c_range.lo > 0.0 && out.c_range.hi > out.c_range.lo, "output.c_range", "0 < lo < hi", out.c_range.lo);
  require(out.means_interval > 0.0, "output.means_interval", "means_interval > 0", out.means_interval);
}

}  // namespace popnet

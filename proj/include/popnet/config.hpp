#pragma once

// Scenario documents (YAML) and the built-in experiment presets.
//
// Every key is optional; missing keys take the reference defaults from
// params.hpp. Unknown keys and wrongly typed values are rejected with a
// ConfigError naming the key path. See docs/scenario_schema.md.

#include <yaml-cpp/yaml.h>

#include <array>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "popnet/params.hpp"

namespace popnet {

namespace detail {

inline void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw ConfigError(path, "expected a table");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, const std::string& path, T& out) {
  const auto child = node[key];
  if (!child) return;
  const std::string field = path.empty() ? key : path + "." + key;
  if (!child.IsScalar()) throw ConfigError(field, "expected a scalar");
  try {
    out = child.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "wrong type");
  }
}

inline void read_range(const YAML::Node& node, const char* key, const std::string& path, Range& out) {
  const auto child = node[key];
  if (!child) return;
  const std::string field = path + "." + key;
  if (!child.IsSequence() || child.size() != 2) throw ConfigError(field, "expected a two-element array");
  try {
    out = {child[0].as<double>(), child[1].as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "wrong type");
  }
}

template <class E, std::size_t N>
void read_enum(const YAML::Node& node, const char* key, const std::string& path, E& out,
               const std::array<std::pair<std::string_view, E>, N>& names) {
  std::string s;
  read(node, key, path, s);
  if (!node[key]) return;
  for (const auto& [name, value] : names)
    if (s == name) {
      out = value;
      return;
    }
  throw ConfigError(path + "." + key, "unknown value '" + s + "'");
}

inline constexpr std::array<std::pair<std::string_view, Activation::Kind>, 2> kActivationNames{
    {{"constant", Activation::Kind::constant}, {"sigmoid", Activation::Kind::sigmoid}}};
inline constexpr std::array<std::pair<std::string_view, GateArgument>, 2> kGateArgNames{
    {{"rho", GateArgument::rho}, {"opinion", GateArgument::opinion}}};
inline constexpr std::array<std::pair<std::string_view, MeanOpinionMode>, 2> kMvModeNames{
    {{"instantaneous", MeanOpinionMode::instantaneous}, {"frozen_at_init", MeanOpinionMode::frozen_at_init}}};
inline constexpr std::array<std::pair<std::string_view, NoiseFamily>, 2> kNoiseNames{
    {{"truncated_gaussian", NoiseFamily::truncated_gaussian}, {"two_point", NoiseFamily::two_point}}};
inline constexpr std::array<std::pair<std::string_view, OpinionBoundary>, 2> kBoundaryNames{
    {{"clamp", OpinionBoundary::clamp}, {"reflect", OpinionBoundary::reflect}}};

template <class E, std::size_t N>
std::string_view enum_name(E value, const std::array<std::pair<std::string_view, E>, N>& names) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  return "?";
}

inline void read_activation(const YAML::Node& node, const char* key, const std::string& path, Activation& a) {
  const auto child = node[key];
  if (!child) return;
  const std::string p = path + "." + key;
  check_keys(child, p, {"kind", "value", "threshold", "steepness"});
  read_enum(child, "kind", p, a.kind, kActivationNames);
  read(child, "value", p, a.value);
  read(child, "threshold", p, a.threshold);
  read(child, "steepness", p, a.steepness);
}

inline void read_opinion_control(const YAML::Node& node, const std::string& path, OpinionControlParams& o) {
  check_keys(node, path, {"gamma_v", "v_target", "rv", "hv", "hv_argument"});
  read(node, "gamma_v", path, o.gamma_v);
  read(node, "v_target", path, o.v_target);
  read_activation(node, "rv", path, o.rv);
  read_activation(node, "hv", path, o.hv);
  read_enum(node, "hv_argument", path, o.hv_argument, kGateArgNames);
}

inline YAML::Node range_node(const Range& r) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.push_back(r.lo);
  n.push_back(r.hi);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

inline YAML::Node activation_node(const Activation& a) {
  YAML::Node n;
  n["kind"] = std::string(enum_name(a.kind, kActivationNames));
  n["value"] = a.value;
  n["threshold"] = a.threshold;
  n["steepness"] = a.steepness;
  return n;
}

inline YAML::Node opinion_control_node(const OpinionControlParams& o) {
  YAML::Node n;
  n["gamma_v"] = o.gamma_v;
  n["v_target"] = o.v_target;
  n["rv"] = activation_node(o.rv);
  n["hv"] = activation_node(o.hv);
  n["hv_argument"] = std::string(enum_name(o.hv_argument, kGateArgNames));
  return n;
}

}  // namespace detail

/// Parses and validates a scenario document. An empty document yields the
/// reference defaults with a single group.
inline ScenarioConfig parse_scenario(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    throw ConfigError("document", std::string("malformed: ") + ex.what());
  }
  ScenarioConfig cfg;
  if (root.IsNull()) {
    validate(cfg);
    return cfg;
  }
  check_keys(root, "", {"name", "contacts", "contact_control", "opinions", "opinion_control", "groups", "sim", "output"});
  read(root, "name", "", cfg.name);

  if (auto n = root["contacts"]) {
    check_keys(n, "contacts", {"beta", "mu", "c_bar", "theta", "delta_phi", "nu"});
    auto& c = cfg.contacts;
    read(n, "beta", "contacts", c.beta);
    read(n, "mu", "contacts", c.mu);
    read(n, "c_bar", "contacts", c.c_bar);
    read(n, "theta", "contacts", c.theta);
    read(n, "delta_phi", "contacts", c.delta_phi);
    read(n, "nu", "contacts", c.nu);
  }
  if (auto n = root["contact_control"]) {
    check_keys(n, "contact_control", {"lambda", "gamma_c", "alpha_r", "alpha_h", "c_min", "r", "rho_star"});
    auto& c = cfg.contact_control;
    read(n, "lambda", "contact_control", c.lambda);
    read(n, "gamma_c", "contact_control", c.gamma_c);
    read(n, "alpha_r", "contact_control", c.alpha_r);
    read(n, "alpha_h", "contact_control", c.alpha_h);
    read(n, "c_min", "contact_control", c.c_min);
    read(n, "r", "contact_control", c.r);
    read(n, "rho_star", "contact_control", c.rho_star);
  }
  if (auto n = root["opinions"]) {
    check_keys(n, "opinions", {"alpha", "delta", "p", "sigma"});
    auto& o = cfg.opinions;
    read(n, "alpha", "opinions", o.alpha);
    read(n, "delta", "opinions", o.delta);
    read(n, "p", "opinions", o.p);
    read(n, "sigma", "opinions", o.sigma);
  }
  if (auto n = root["opinion_control"]) read_opinion_control(n, "opinion_control", cfg.opinion_control);

  if (auto n = root["groups"]) {
    if (!n.IsSequence() || n.size() == 0) throw ConfigError("groups", "expected a non-empty array of tables");
    cfg.groups.clear();
    for (std::size_t g = 0; g < n.size(); ++g) {
      const std::string path = "groups[" + std::to_string(g) + "]";
      const auto gn = n[g];
      check_keys(gn, path, {"name", "fraction", "init_c", "init_v", "contact_control_enabled",
                            "opinion_control_enabled", "opinion_control"});
      GroupSpec gs;
      gs.name = "group" + std::to_string(g);
      gs.opinion_control = cfg.opinion_control;
      read(gn, "name", path, gs.name);
      read(gn, "fraction", path, gs.fraction);
      read_range(gn, "init_c", path, gs.init_c);
      read_range(gn, "init_v", path, gs.init_v);
      read(gn, "contact_control_enabled", path, gs.contact_control_enabled);
      read(gn, "opinion_control_enabled", path, gs.opinion_control_enabled);
      if (auto oc = gn["opinion_control"]) read_opinion_control(oc, path + ".opinion_control", gs.opinion_control);
      cfg.groups.push_back(std::move(gs));
    }
  } else {
    cfg.groups.front().opinion_control = cfg.opinion_control;
  }

  if (auto n = root["sim"]) {
    check_keys(n, "sim", {"epsilon", "t_final", "n_particles", "seed", "snapshot_times", "mv_mode", "contact_noise",
                          "opinion_noise", "boundary"});
    auto& s = cfg.sim;
    read(n, "epsilon", "sim", s.epsilon);
    read(n, "t_final", "sim", s.t_final);
    read(n, "n_particles", "sim", s.n_particles);
    read(n, "seed", "sim", s.seed);
    if (auto t = n["snapshot_times"]) {
      if (!t.IsSequence()) throw ConfigError("sim.snapshot_times", "expected an array");
      s.snapshot_times.clear();
      try {
        for (const auto& x : t) s.snapshot_times.push_back(x.as<double>());
      } catch (const YAML::Exception&) {
        throw ConfigError("sim.snapshot_times", "wrong type");
      }
    }
    read_enum(n, "mv_mode", "sim", s.mv_mode, kMvModeNames);
    read_enum(n, "contact_noise", "sim", s.contact_noise, kNoiseNames);
    read_enum(n, "opinion_noise", "sim", s.opinion_noise, kNoiseNames);
    if (auto b = n["boundary"]) {
      check_keys(b, "sim.boundary", {"opinion", "contact_resample_max", "contact_floor_factor"});
      read_enum(b, "opinion", "sim.boundary", s.boundary.opinion, kBoundaryNames);
      read(b, "contact_resample_max", "sim.boundary", s.boundary.contact_resample_max);
      read(b, "contact_floor_factor", "sim.boundary", s.boundary.contact_floor_factor);
    }
  }
  if (auto n = root["output"]) {
    check_keys(n, "output", {"bins_v", "bins_c", "c_range", "means_interval"});
    read(n, "bins_v", "output", cfg.output.bins_v);
    read(n, "bins_c", "output", cfg.output.bins_c);
    read_range(n, "c_range", "output", cfg.output.c_range);
    read(n, "means_interval", "output", cfg.output.means_interval);
  }
  validate(cfg);
  return cfg;
}

/// Serializes every field; parse_scenario(to_yaml(cfg)) == cfg.
inline std::string to_yaml(const ScenarioConfig& cfg) {
  using namespace detail;
  YAML::Node root;
  root["name"] = cfg.name;
  const auto& c = cfg.contacts;
  root["contacts"]["beta"] = c.beta;
  root["contacts"]["mu"] = c.mu;
  root["contacts"]["c_bar"] = c.c_bar;
  root["contacts"]["theta"] = c.theta;
  root["contacts"]["delta_phi"] = c.delta_phi;
  root["contacts"]["nu"] = c.nu;
  const auto& k = cfg.contact_control;
  root["contact_control"]["lambda"] = k.lambda;
  root["contact_control"]["gamma_c"] = k.gamma_c;
  root["contact_control"]["alpha_r"] = k.alpha_r;
  root["contact_control"]["alpha_h"] = k.alpha_h;
  root["contact_control"]["c_min"] = k.c_min;
  root["contact_control"]["r"] = k.r;
  root["contact_control"]["rho_star"] = k.rho_star;
  const auto& o = cfg.opinions;
  root["opinions"]["alpha"] = o.alpha;
  root["opinions"]["delta"] = o.delta;
  root["opinions"]["p"] = o.p;
  root["opinions"]["sigma"] = o.sigma;
  root["opinion_control"] = opinion_control_node(cfg.opinion_control);
  for (const auto& g : cfg.groups) {
    YAML::Node gn;
    gn["name"] = g.name;
    gn["fraction"] = g.fraction;
    gn["init_c"] = range_node(g.init_c);
    gn["init_v"] = range_node(g.init_v);
    gn["contact_control_enabled"] = g.contact_control_enabled;
    gn["opinion_control_enabled"] = g.opinion_control_enabled;
    gn["opinion_control"] = opinion_control_node(g.opinion_control);
    root["groups"].push_back(gn);
  }
  const auto& s = cfg.sim;
  root["sim"]["epsilon"] = s.epsilon;
  root["sim"]["t_final"] = s.t_final;
  root["sim"]["n_particles"] = s.n_particles;
  root["sim"]["seed"] = s.seed;
  YAML::Node times(YAML::NodeType::Sequence);
  for (double t : s.snapshot_times) times.push_back(t);
  times.SetStyle(YAML::EmitterStyle::Flow);
  root["sim"]["snapshot_times"] = times;
  root["sim"]["mv_mode"] = std::string(enum_name(s.mv_mode, kMvModeNames));
  root["sim"]["contact_noise"] = std::string(enum_name(s.contact_noise, kNoiseNames));
  root["sim"]["opinion_noise"] = std::string(enum_name(s.opinion_noise, kNoiseNames));
  root["sim"]["boundary"]["opinion"] = std::string(enum_name(s.boundary.opinion, kBoundaryNames));
  root["sim"]["boundary"]["contact_resample_max"] = s.boundary.contact_resample_max;
  root["sim"]["boundary"]["contact_floor_factor"] = s.boundary.contact_floor_factor;
  root["output"]["bins_v"] = cfg.output.bins_v;
  root["output"]["bins_c"] = cfg.output.bins_c;
  root["output"]["c_range"] = range_node(cfg.output.c_range);
  root["output"]["means_interval"] = cfg.output.means_interval;

  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << root;
  return std::string(em.c_str()) + "\n";
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"test1_a", "test1_b", "test1_c", "test1_d", "test2_a",
                                              "test2_b", "test2_c", "test3_a", "test3_b", "test3_c"};
  return names;
}

/// Built-in experiment scenarios. `n_particles` defaults to desk scale; pass
/// 1'000'000 for full-size runs.
inline ScenarioConfig preset(const std::string& name, std::int64_t n_particles = 10000) {
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.sim.n_particles = n_particles;
  cfg.sim.epsilon = 1e-3;

  auto group = [&](std::string gname, double frac, Range c, Range v, double v_target) {
    GroupSpec g;
    g.name = std::move(gname);
    g.fraction = frac;
    g.init_c = c;
    g.init_v = v;
    g.opinion_control = cfg.opinion_control;
    g.opinion_control.v_target = v_target;
    return g;
  };

  if (name.rfind("test1_", 0) == 0 && name.size() == 7) {
    const char s = name[6];
    if (s < 'a' || s > 'd') throw ConfigError("preset", "unknown preset '" + name + "'");
    cfg.sim.t_final = 50.0;
    cfg.sim.snapshot_times = {1.0, 5.0, 50.0};
    auto leaders = group("leaders", 0.25, {150.0, 200.0}, {0.4, 0.6}, cfg.opinion_control.v_target);
    auto mass = group("mass", 0.75, {10.0, 90.0}, {-0.9, -0.1}, cfg.opinion_control.v_target);
    leaders.contact_control_enabled = (s == 'b' || s == 'd');
    leaders.opinion_control_enabled = (s == 'c' || s == 'd');
    cfg.groups = {leaders, mass};
  } else if (name.rfind("test2_", 0) == 0 && name.size() == 7) {
    const char s = name[6];
    if (s < 'a' || s > 'c') throw ConfigError("preset", "unknown preset '" + name + "'");
    cfg.sim.t_final = 50.0;
    cfg.sim.snapshot_times = {1.0, 5.0, 10.0, 15.0, 20.0};
    auto a = group("A", 0.25, {200.0, 250.0}, {-0.6, -0.4}, -0.5);
    auto b = group("B", 0.25, {200.0, 250.0}, {0.4, 0.6}, 0.5);
    auto mass = group("mass", 0.5, {50.0, 100.0}, {-0.8, 0.8}, cfg.opinion_control.v_target);
    if (s != 'a') {
      a.opinion_control_enabled = b.opinion_control_enabled = true;
      a.opinion_control.gamma_v = (s == 'b') ? 1.0 : 100.0;
      b.opinion_control.gamma_v = 1.0;
    }
    cfg.groups = {a, b, mass};
  } else if (name.rfind("test3_", 0) == 0 && name.size() == 7) {
    const char s = name[6];
    if (s < 'a' || s > 'c') throw ConfigError("preset", "unknown preset '" + name + "'");
    cfg.sim.t_final = 150.0;
    cfg.sim.snapshot_times = {1.0, 10.0, 50.0, 100.0, 150.0};
    cfg.contact_control.gamma_c = 1.0;
    cfg.opinion_control.gamma_v = 1.0;
    auto a = group("A", 0.25, {200.0, 250.0}, {-0.6, -0.4}, -0.5);
    auto b = group("B", 0.25, {200.0, 250.0}, {0.4, 0.6}, 0.5);
    auto mass = group("mass", 0.5, {50.0, 100.0}, {0.1, 0.6}, cfg.opinion_control.v_target);
    a.opinion_control_enabled = b.opinion_control_enabled = true;
    a.contact_control_enabled = (s == 'b' || s == 'c');
    b.contact_control_enabled = (s == 'c');
    cfg.groups = {a, b, mass};
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  validate(cfg);
  return cfg;
}

}  // namespace popnet

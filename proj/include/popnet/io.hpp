#pragma once

// Output bundle: means time series (CSV), per-snapshot marginals (CSV) and
// joint histograms (NDJSON), diagnostics, the effective scenario and a run
// manifest. Formats are described in docs/output_formats.md.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "popnet/config.hpp"
#include "popnet/engine.hpp"
#include "popnet/stats.hpp"

#ifndef POPNET_VERSION
#define POPNET_VERSION "0.1.0"
#endif

namespace popnet {

inline constexpr const char* kVersion = POPNET_VERSION;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 9 significant digits, locale-independent.
inline std::string fmt9(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline std::string write_timeseries(const std::vector<Observables>& rows, const std::vector<std::string>& groups) {
  if (rows.empty()) throw std::invalid_argument("write_timeseries: no rows");
  std::string out = "t,m_c_global,m_v_global";
  for (const auto& g : groups) out += ",m_c_" + g;
  for (const auto& g : groups) out += ",m_v_" + g;
  out += '\n';
  double last_t = -INFINITY;
  for (const auto& o : rows) {
    if (o.t < last_t) throw std::invalid_argument("write_timeseries: rows not ordered by t");
    last_t = o.t;
    out += fmt9(o.t) + ',' + fmt9(o.m_c_global) + ',' + fmt9(o.m_v_global);
    for (double x : o.m_c_by_group) out += ',' + fmt9(x);
    for (double x : o.m_v_by_group) out += ',' + fmt9(x);
    out += '\n';
  }
  return out;
}

inline HistogramSpec histogram_spec(const OutputParams& o) {
  return {o.bins_v, o.c_range.lo, o.c_range.hi, o.bins_c};
}

/// One row per bin of each marginal: axis,bin,lo,hi,mass. Contact bin 0 is
/// [0, c_lo) and the last contact bin is [c_hi, inf).
inline std::string write_marginals(const Observables& o, const HistogramSpec& spec) {
  std::string out = "axis,bin,lo,hi,mass\n";
  for (int k = 0; k < spec.bins_v; ++k)
    out += "v," + std::to_string(k) + ',' + fmt9(spec.opinion_edge(k)) + ',' + fmt9(spec.opinion_edge(k + 1)) + ',' +
           fmt9(o.hist.v[std::size_t(k)]) + '\n';
  for (int k = 0; k < spec.contact_slots(); ++k) {
    const double hi = k == spec.bins_c + 1 ? INFINITY : spec.contact_edge(k + 1);
    out += "c," + std::to_string(k) + ',' + fmt9(spec.contact_edge(k)) + ',' + fmt9(hi) + ',' +
           fmt9(o.hist.c[std::size_t(k)]) + '\n';
  }
  return out;
}

/// One JSON object per nonzero joint bin: {"t","iv","ic","mass"}.
inline std::string write_joint(const Observables& o, const HistogramSpec& spec) {
  std::string out;
  const int slots = spec.contact_slots();
  for (int iv = 0; iv < spec.bins_v; ++iv)
    for (int ic = 0; ic < slots; ++ic) {
      const double m = o.hist.joint[std::size_t(iv) * std::size_t(slots) + std::size_t(ic)];
      if (m == 0.0) continue;
      out += "{\"t\":" + fmt9(o.t) + ",\"iv\":" + std::to_string(iv) + ",\"ic\":" + std::to_string(ic) +
             ",\"mass\":" + fmt9(m) + "}\n";
    }
  return out;
}

inline nlohmann::ordered_json diagnostics_json(const Diagnostics& d) {
  nlohmann::ordered_json j;
  j["opinion_clamps"] = d.opinion_clamps;
  j["contact_resamples"] = d.contact_resamples;
  j["contact_clamps"] = d.contact_clamps;
  j["noise_resamples"] = d.noise_resamples;
  j["unconfident_pairs"] = d.unconfident_pairs;
  j["idle_agents"] = d.idle_agents;
  return j;
}

/// File stem for a snapshot, e.g. "t5" or "t0.5".
inline std::string snapshot_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%.9g", t);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(text.data(), std::streamsize(text.size()));
  f.close();
  if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct RunInfo {
  unsigned threads = 1;
  double wall_seconds = 0.0;
  std::string scenario_source;
};

/// Writes the full bundle into dir (created if needed). Returns the files written.
inline std::vector<std::string> write_bundle(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                                             const RunResult& res, const RunInfo& info) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto spec = histogram_spec(cfg.output);
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    files.push_back(name);
  };

  put("timeseries.csv", write_timeseries(res.trajectory, res.group_names));
  nlohmann::ordered_json snaps = nlohmann::ordered_json::array();
  // The initial state always leads the timeseries; it gets snapshot files
  // only when t = 0 is on the schedule.
  const auto& sched = cfg.sim.snapshot_times;
  const bool t0_scheduled = !sched.empty() && sched.front() == 0.0;
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    const auto& o = res.snapshots[k];
    if (k == 0 && !t0_scheduled && res.snapshots.size() > 1) continue;
    const auto tag = snapshot_tag(o.t);
    put("marginals_" + tag + ".csv", write_marginals(o, spec));
    put("joint_" + tag + ".ndjson", write_joint(o, spec));
    snaps.push_back({{"t", o.t}, {"marginals", "marginals_" + tag + ".csv"}, {"joint", "joint_" + tag + ".ndjson"}});
  }
  put("diagnostics.json", diagnostics_json(res.diagnostics).dump(2) + "\n");
  const std::string yaml = to_yaml(cfg);
  put("scenario.yaml", yaml);

  nlohmann::ordered_json m;
  m["name"] = cfg.name;
  m["version"] = kVersion;
  m["seed"] = cfg.sim.seed;
  m["n_particles"] = cfg.sim.n_particles;
  m["threads"] = info.threads;
  m["wall_time_seconds"] = info.wall_seconds;
  m["scenario_source"] = info.scenario_source;
  m["scenario_yaml"] = yaml;
  m["groups"] = res.group_names;
  m["snapshots"] = snaps;
  m["histogram"] = {{"bins_v", spec.bins_v}, {"bins_c", spec.bins_c}, {"c_lo", spec.c_lo}, {"c_hi", spec.c_hi}};
  put("manifest.json", m.dump(2) + "\n");
  return files;
}

/// Effective scenario stored in a manifest.
inline ScenarioConfig scenario_from_manifest(const std::string& manifest_text) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(manifest_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest", std::string("invalid JSON: ") + e.what());
  }
  if (!m.contains("scenario_yaml") || !m["scenario_yaml"].is_string())
    throw ConfigError("manifest.scenario_yaml", "missing");
  return parse_scenario(m["scenario_yaml"].get<std::string>());
}

}  // namespace popnet

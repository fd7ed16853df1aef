// popnet command-line driver: `run` writes an output bundle, `validate` runs
// the oracle suites.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "popnet/config.hpp"
#include "popnet/engine.hpp"
#include "popnet/io.hpp"
#include "popnet/oracles.hpp"

namespace {

using namespace popnet;

unsigned default_threads() {
  if (const char* env = std::getenv("POPNET_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return unsigned(n);
  }
  return 1;
}

// A preset name, a scenario YAML file, or a bundle manifest.json.
ScenarioConfig load_scenario(const std::string& source) {
  for (const auto& name : preset_names())
    if (name == source) return preset(source);
  const std::filesystem::path p(source);
  if (!std::filesystem::exists(p)) throw ConfigError("scenario", "no preset or file named '" + source + "'");
  std::string text;
  try {
    text = read_file(p);
  } catch (const IoError& e) {
    throw ConfigError("scenario", e.what());
  }
  if (p.extension() == ".json") return scenario_from_manifest(text);
  return parse_scenario(text);
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> particles;
  std::string out = "out";
  unsigned threads = 1;
};

int cmd_run(const RunArgs& a) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(a.scenario);
    if (a.seed) cfg.sim.seed = *a.seed;
    if (a.particles) cfg.sim.n_particles = *a.particles;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run(cfg, a.threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    const auto files = write_bundle(a.out, cfg, res, {a.threads, secs, a.scenario});
    std::cout << cfg.name << ": " << res.snapshots.size() << " snapshots, " << files.size() << " files in " << a.out
              << " (" << fmt9(secs) << " s)\n";
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

struct ValidateArgs {
  std::string suite = "all";
  double mu = 0.1;
  std::string out;
  unsigned threads = 1;
};

int cmd_validate(const ValidateArgs& a) {
  const bool all = a.suite == "all";
  if (!all && a.suite != "steady-state" && a.suite != "minimizers" && a.suite != "scaling") {
    std::cerr << "unknown suite '" << a.suite << "' (expected steady-state, minimizers, scaling or all)\n";
    return 2;
  }
  std::vector<oracles::CheckResult> results;
  if (all || a.suite == "scaling") {
    oracles::ScalingSetup s;
    s.mu = a.mu;
    results.push_back(oracles::check_scaling(s));
  }
  if (all || a.suite == "minimizers") {
    results.push_back(oracles::check_contact_minimizer());
    results.push_back(oracles::check_opinion_minimizer());
  }
  if (all || a.suite == "steady-state") {
    oracles::SteadyStateSetup s;
    s.contacts.mu = a.mu;
    if (!(a.mu > 0.0)) {
      std::cerr << "steady-state suite needs --mu > 0\n";
      return 2;
    }
    results.push_back(oracles::check_steady_state(s, a.threads));
  }
  bool ok = true;
  std::string csv = "check,quantity,oracle,observed\n";
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
    for (const auto& row : r.csv_rows) csv += row + "\n";
  }
  if (!a.out.empty()) {
    try {
      write_file(a.out, csv);
    } catch (const IoError& e) {
      std::cerr << "i/o error: " << e.what() << "\n";
      return 3;
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"popnet: kinetic simulator for opinions and contacts on a controlled social network"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(popnet::kVersion));

  RunArgs ra;
  ra.threads = default_threads();
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write an output bundle");
  run_cmd->add_option("--scenario", ra.scenario, "preset name, scenario YAML or bundle manifest.json")->required();
  run_cmd->add_option("--seed", ra.seed, "override the scenario seed");
  run_cmd->add_option("--particles", ra.particles, "override the number of agents");
  run_cmd->add_option("--out", ra.out, "output directory")->capture_default_str();
  run_cmd->add_option("--threads", ra.threads, "worker threads (default: $POPNET_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  ValidateArgs va;
  va.threads = default_threads();
  auto* val_cmd = app.add_subcommand("validate", "run the oracle suites");
  val_cmd->add_option("--suite", va.suite, "steady-state | minimizers | scaling | all")->capture_default_str();
  val_cmd->add_option("--mu", va.mu, "mean-reversion parameter for steady-state and scaling")->capture_default_str();
  val_cmd->add_option("--out", va.out, "write oracle-vs-observed CSV here");
  val_cmd->add_option("--threads", va.threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (*run_cmd) return cmd_run(ra);
    return cmd_validate(va);
  } catch (const popnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// End-to-end acceptance run: oracle checks, bounds and conservation over every
// preset, qualitative reproduction of the three experiment families, and
// determinism. Prints one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "popnet/config.hpp"
#include "popnet/engine.hpp"
#include "popnet/io.hpp"
#include "popnet/oracles.hpp"

using namespace popnet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
  int id;
  bool passed;
  std::string detail;
};

std::vector<Line> lines;

void report(int id, bool passed, const std::string& detail) {
  lines.push_back({id, passed, detail});
  std::printf("[criterion %d] %s  %s\n", id, passed ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string f(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

// Bin centers of local maxima of the opinion marginal, after a 5-bin moving
// average. A bin is a maximum if it strictly exceeds every bin within +-3.
std::vector<double> opinion_modes(const std::vector<double>& h) {
  const int n = int(h.size());
  std::vector<double> s(h.size());
  for (int k = 0; k < n; ++k) {
    double acc = 0;
    int cnt = 0;
    for (int j = std::max(0, k - 2); j <= std::min(n - 1, k + 2); ++j, ++cnt) acc += h[std::size_t(j)];
    s[std::size_t(k)] = acc / cnt;
  }
  std::vector<double> modes;
  for (int k = 0; k < n; ++k) {
    bool peak = s[std::size_t(k)] > 0.0;
    for (int j = std::max(0, k - 3); peak && j <= std::min(n - 1, k + 3); ++j)
      if (j != k && !(s[std::size_t(k)] > s[std::size_t(j)])) peak = false;
    if (peak) modes.push_back(-1.0 + (k + 0.5) * 2.0 / n);
  }
  return modes;
}

bool has_mode_in(const std::vector<double>& modes, double lo, double hi) {
  for (double m : modes)
    if (m >= lo && m <= hi) return true;
  return false;
}

std::string list(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? " " : "") + f(xs[k], 3);
  return s + "]";
}

double mass_in(const std::vector<double>& h, double lo, double hi) {
  const int n = int(h.size());
  double m = 0;
  for (int k = 0; k < n; ++k) {
    const double a = -1.0 + 2.0 * k / n, b = -1.0 + 2.0 * (k + 1) / n;
    if (a >= lo - 1e-12 && b <= hi + 1e-12) m += h[std::size_t(k)];
  }
  return m;
}

struct PresetRun {
  RunResult result;
  double seconds = 0;
  bool bounds_ok = true;
  std::string first_violation;
};

PresetRun run_preset(const std::string& name, unsigned threads) {
  PresetRun pr;
  const auto cfg = preset(name);
  const auto t0 = Clock::now();
  pr.result = run(cfg, threads, [&](const Ensemble& e, const Observables& o) {
    for (std::size_t i = 0; i < e.size() && pr.bounds_ok; ++i)
      if (!(e.v[i] >= -1.0 && e.v[i] <= 1.0 && e.c[i] > 0.0)) {
        pr.bounds_ok = false;
        pr.first_violation = name + " t=" + f(o.t) + " agent " + std::to_string(i);
      }
  });
  pr.seconds = seconds_since(t0);
  std::printf("  ran %s in %.1f s\n", name.c_str(), pr.seconds);
  std::fflush(stdout);
  return pr;
}

}  // namespace

int main() {
  const auto t_all = Clock::now();

  // 1. Log-contact steady state against the independently derived OU law.
  {
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    const auto t0 = Clock::now();
    const auto r = oracles::check_steady_state({}, threads);
    const double secs = seconds_since(t0);
    report(1, r.passed && secs <= 120.0,
           r.detail + "; " + f(secs, 3) + " s on " + std::to_string(threads) + " thread(s) (limit 120 s)");
  }

  // 2. Closed-form controls against brute-force minimization.
  {
    const auto t0 = Clock::now();
    const auto c = oracles::check_contact_minimizer();
    const auto o = oracles::check_opinion_minimizer();
    const double secs = seconds_since(t0);
    report(2, c.passed && o.passed && secs <= 300.0,
           "kappa: " + c.detail + "; u: " + o.detail + "; " + f(secs, 3) + " s (limit 300 s)");
  }

  // 3. Epsilon -> 0 convergence order.
  {
    const auto t0 = Clock::now();
    const auto r = oracles::check_scaling();
    const double secs = seconds_since(t0);
    report(3, r.passed && secs <= 10.0, r.detail + "; " + f(secs, 3) + " s (limit 10 s)");
  }

  // Every preset at desk scale, single-threaded; reused by criteria 4-8.
  std::map<std::string, PresetRun> runs;
  for (const auto& name : preset_names()) runs[name] = run_preset(name, 1);

  // 4. Bounds on every preset + mean-opinion martingale in a symmetric run.
  {
    bool bounds = true;
    std::string where;
    for (const auto& [name, pr] : runs)
      if (!pr.bounds_ok) {
        bounds = false;
        if (where.empty()) where = pr.first_violation;
      }

    auto cfg = preset("test1_a");
    cfg.opinions.p = 0.0;
    cfg.opinions.delta = 2.0;
    cfg.opinions.sigma = 0.05;
    for (auto& g : cfg.groups) g.contact_control_enabled = g.opinion_control_enabled = false;
    const auto r = run(cfg);
    // Increments of m_v over the means grid, grouped into 50 batches.
    const auto& tr = r.trajectory;
    const std::size_t n_inc = tr.size() - 1, batches = 50, per = n_inc / batches;
    std::vector<double> sums(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b)
      for (std::size_t k = b * per; k < (b + 1) * per; ++k) sums[b] += tr[k + 1].m_v_global - tr[k].m_v_global;
    double mean = 0;
    for (double s : sums) mean += s / batches;
    double var = 0;
    for (double s : sums) var += (s - mean) * (s - mean) / (batches - 1);
    const double se_total = std::sqrt(double(batches) * var);
    const double drift = tr.back().m_v_global - tr.front().m_v_global;
    const bool mart = std::abs(drift) <= 4.0 * se_total;
    const bool clamps = r.diagnostics.clamps() == 0;
    report(4, bounds && mart && clamps,
           std::string("bounds ") + (bounds ? "ok on all presets" : "violated at " + where) + "; |m_v(T)-m_v(0)| = " +
               f(std::abs(drift), 3) + " vs 4 se = " + f(4.0 * se_total, 3) + "; clamps " +
               std::to_string(r.diagnostics.clamps()));
  }

  auto final_means = [&](const std::string& name) -> const Observables& { return runs[name].result.trajectory.back(); };
  auto initial_means = [&](const std::string& name) -> const Observables& {
    return runs[name].result.trajectory.front();
  };
  // Opinion marginal at t_final; snapshot schedules may stop earlier.
  auto final_marginal = [&](const std::string& name) {
    return build_histograms(runs[name].result.final_ensemble, histogram_spec(preset(name).output)).v;
  };

  // 5. Test 1 orderings.
  {
    const auto& a = final_means("test1_a");
    const bool i = a.m_c_by_group[0] < initial_means("test1_a").m_c_by_group[0] && a.m_v_global < 0.0;
    const double mc_a = a.m_c_global, mc_b = final_means("test1_b").m_c_global;
    const double mc_c = final_means("test1_c").m_c_global, mc_d = final_means("test1_d").m_c_global;
    const bool ii = std::min(mc_b, mc_d) > std::max(mc_a, mc_c);
    const double mv_d = final_means("test1_d").m_v_global;
    const bool iii = std::abs(mv_d - 0.5) < 0.15;
    double secs = 0;
    for (const char* n : {"test1_a", "test1_b", "test1_c", "test1_d"}) secs += runs[n].seconds;
    report(5, i && ii && iii && secs <= 600.0,
           "(i) leader m_c " + f(initial_means("test1_a").m_c_by_group[0]) + " -> " + f(a.m_c_by_group[0]) +
               ", m_v(T) " + f(a.m_v_global, 3) + (i ? " ok" : " FAIL") + "; (ii) m_c(T) a/b/c/d " + f(mc_a) + "/" +
               f(mc_b) + "/" + f(mc_c) + "/" + f(mc_d) + (ii ? " ok" : " FAIL") + "; (iii) m_v(T) d " + f(mv_d, 3) +
               (iii ? " ok" : " FAIL") + "; " + f(secs, 3) + " s (limit 600 s)");
  }

  // 6. Test 2: symmetric polarization, asymmetric dominance.
  {
    const auto modes = opinion_modes(final_marginal("test2_b"));
    const bool i = has_mode_in(modes, -0.7, -0.3) && has_mode_in(modes, 0.3, 0.7);
    const double mv_c = final_means("test2_c").m_v_global;
    const bool ii = mv_c > 0.3;
    report(6, i && ii,
           "(i) test2_b modes " + list(modes) + (i ? " ok" : " FAIL (need one in [-0.7,-0.3] and one in [0.3,0.7])") +
               "; (ii) test2_c m_v(T) " + f(mv_c, 3) + (ii ? " ok" : " FAIL"));
  }

  // 7. Test 3 with both controls on both leader groups.
  {
    const auto h = final_marginal("test3_c");
    const auto modes = opinion_modes(h);
    const bool poles = has_mode_in(modes, -0.7, -0.3) && has_mode_in(modes, 0.3, 0.7);
    const double centre = mass_in(h, -0.2, 0.2);
    report(7, poles && centre > 0.0,
           "test3_c modes " + list(modes) + (poles ? " ok" : " FAIL") + "; mass in [-0.2,0.2] " + f(centre, 3));
  }

  // 8. Determinism: rerun a preset with 8 workers.
  {
    const auto again = run_preset("test1_a", 8);
    const auto& first = runs["test1_a"].result;
    const bool csv = write_timeseries(first.trajectory, first.group_names) ==
                     write_timeseries(again.result.trajectory, again.result.group_names);
    const bool ens = first.final_ensemble == again.result.final_ensemble;
    report(8, csv && ens,
           std::string("test1_a 1 vs 8 threads: timeseries CSV ") + (csv ? "byte-identical" : "DIFFERS") +
               ", final ensemble " + (ens ? "bit-identical" : "DIFFERS"));
  }

  int failed = 0;
  for (const auto& l : lines) failed += !l.passed;
  std::printf("acceptance: %zu/%zu criteria passed (%.0f s total)\n", lines.size() - failed, lines.size(),
              seconds_since(t_all));
  return failed;
}

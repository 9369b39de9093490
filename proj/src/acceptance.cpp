#include "prandtl/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "prandtl/errors.hpp"
#include "prandtl/io.hpp"
#include "prandtl/modulation.hpp"
#include "prandtl/nonlocal.hpp"
#include "prandtl/profiles.hpp"
#include "prandtl/quadrature.hpp"
#include "prandtl/spectral.hpp"

namespace prandtl::acceptance {

namespace {

constexpr double kPi = std::numbers::pi;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Check {
  CriterionResult r;
  Timer timer;
  bool ok = true;

  Check(int id, std::string name, double budget) {
    r.id = id;
    r.name = std::move(name);
    r.budget_seconds = budget;
  }
  void metric(const std::string& key, double value) { r.metrics.emplace_back(key, value); }
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!r.note.empty()) r.note += "; ";
      r.note += what;
    }
  }
  CriterionResult finish(double extra_seconds = 0.0) {
    r.seconds = timer.seconds() + extra_seconds;
    if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
      std::ostringstream msg;
      msg << "runtime " << r.seconds << " s over budget " << r.budget_seconds << " s";
      require(false, msg.str());
    }
    r.passed = ok;
    return r;
  }
};

CriterionResult guarded(int id, const std::string& name, const std::function<CriterionResult()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    r.passed = false;
    r.note = std::string("error: ") + e.what();
    return r;
  }
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

SolverConfig Options::default_simulation() {
  SolverConfig c;
  c.lambda0 = 4.0;
  c.blowup_threshold = 1e5;
  c.perturbation_amplitude = 0.0;
  return c;
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PRANDTL_LAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

Field random_smooth_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), centre(-3.0, 3.0), width(0.4, 2.0);
  double a[4], m[4], w[4];
  for (int j = 0; j < 4; ++j) {
    a[j] = amp(rng);
    m[j] = centre(rng);
    w[j] = width(rng);
  }
  return sample(grid, [&](double Y) {
    double v = 0.0;
    for (int j = 0; j < 4; ++j) v += a[j] * std::exp(-0.5 * (Y - m[j]) * (Y - m[j]) / (w[j] * w[j]));
    return v;
  });
}

CriterionResult profile_exactness() {
  Check c(1, "profile exactness (k=1)", 1.0);
  const ProfileTable table = build_profile(1);
  double sup = 0.0;
  const int n = 20001;
  for (int i = 0; i < n; ++i) {
    const double Z = -kPi + 2.0 * kPi * i / (n - 1);
    const double h = std::cos(0.5 * Z);
    sup = std::max(sup, std::abs(table.value(Z) - h * h));
  }
  c.metric("sup_error", sup);
  c.require(sup <= 1e-8, "sup |G - cos^2(Z/2)| above 1e-8");
  return c.finish();
}

CriterionResult support_constants() {
  Check c(2, "support constants", 1.0);
  double worst = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const double m = 2.0 * k;
    auto inner = [m](double v) { return m / (1.0 + std::pow(v, m)); };
    auto outer = [m](double w) { return m * std::pow(w, m - 2.0) / (1.0 + std::pow(w, m)); };
    const double oracle =
        integrate_adaptive(inner, 0.0, 1.0, 1e-15, 1e-14).value +
        integrate_adaptive(outer, 0.0, 1.0, 1e-15, 1e-14).value;
    const double e = rel(support_half_width(k), oracle);
    c.metric("rel_error_k" + std::to_string(k), e);
    worst = std::max(worst, e);
  }
  c.require(worst <= 1e-10, "support half-width off the quadrature oracle");
  c.require(support_half_width(1) == kPi, "a_1 is not pi");
  return c.finish();
}

CriterionResult profile_asymptotics() {
  Check c(3, "profile asymptotics (k=2,3)", 5.0);
  for (int k : {2, 3}) {
    const ProfileTable table = build_profile(k);
    const AsymptoticFit fit = fit_asymptotics(table);
    const std::string tag = "_k" + std::to_string(k);
    const double m = 2.0 * k;
    c.metric("center_exponent" + tag, fit.center_exponent);
    c.metric("center_coeff" + tag, fit.center_coeff);
    c.metric("edge_exponent" + tag, fit.edge_exponent);
    c.require(rel(fit.center_exponent, m) <= 0.01, "center exponent" + tag);
    c.require(rel(fit.center_coeff, std::pow(m, -m)) <= 0.02, "center coefficient" + tag);
    c.require(rel(fit.edge_exponent, m / (m - 1.0)) <= 0.01, "edge exponent" + tag);
  }
  return c.finish();
}

CriterionResult profile_equation_residual() {
  Check c(4, "profile equation residual", 5.0);
  for (int k : {1, 2, 3}) {
    const double res = profile_residual(build_profile(k));
    c.metric("residual_k" + std::to_string(k), res);
    c.require(res <= 1e-6, "residual above 1e-6 for k = " + std::to_string(k));
  }
  return c.finish();
}

CriterionResult spectrum() {
  Check c(5, "spectrum", 5.0);
  double worst = 0.0;
  for (int i = 0; i <= 6; ++i) {
    const double e = eigen_residual(i);
    c.metric("eigen_residual_" + std::to_string(i), e);
    worst = std::max(worst, e);
  }
  c.require(worst <= 1e-4, "eigen-residual above 1e-4");
  const double expected[] = {1.0, 2.0, 8.0};
  for (int i = 0; i < 3; ++i) {
    auto f = [i](double Y) {
      const double h = hermite(i, Y);
      return h * h * rho(Y);
    };
    const double norm = integrate_adaptive(f, -20.0, 20.0, 1e-14, 1e-14).value;
    c.metric("norm2_" + std::to_string(i), norm);
    c.require(std::abs(norm - expected[i]) <= 1e-8, "Hermite norm " + std::to_string(i));
  }
  return c.finish();
}

CriterionResult nonlocal_oracles() {
  Check c(9, "nonlocal model oracles", 30.0);
  auto grid = uniform_grid(0.0, 5.0, 1001);
  const std::function<double(double)> data[] = {
      [](double x) { return std::sin(x) + 0.5; },
      [](double x) { return x * std::exp(-x * x); },
      [](double x) { return 1.0 / (1.0 + x * x); },
  };
  double worst = 0.0;
  for (const auto& d : data) {
    const Field u0 = sample(grid, d);
    const Field g = green_solution(u0, 1.0, grid);
    const Field s = direct_solve_nonlocal(u0, 1.0, 1e-3);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(g[i] - s[i]));
      scale = std::max(scale, std::abs(g[i]));
    }
    worst = std::max(worst, err / scale);
  }
  c.metric("green_vs_direct", worst);
  c.require(worst <= 1e-4, "Green and direct solutions differ above 1e-4");

  double ode = 0.0;
  for (double y : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0})
    ode = std::max(ode, kernel_ode_check(y) / std::max(1.0, kernel(y)));
  c.metric("kernel_ode_residual", ode);
  c.require(ode <= 1e-12, "kernel ODE residual above 1e-12");

  auto vgrid = uniform_grid(0.0, 1.0, 401);
  const Field v0 = sample(vgrid, [](double x) { return x * x * std::exp(-x); });
  std::vector<double> times;
  for (int i = 0; i <= 12; ++i) times.push_back(4.0 + 0.5 * i);
  const DecayFit fit = compact_decay(v0, 1.0, times);
  c.metric("decay_slope_l2", fit.slope);
  c.require(std::abs(fit.slope + 2.0) <= 0.2, "l = 2 decay slope outside -2 +- 10%");
  return c.finish();
}

CriterionResult property_suites(std::uint64_t seed) {
  Check c(10, "property suites", 30.0);
  std::mt19937_64 rng(seed);
  auto grid = uniform_grid(-10.0, 10.0, 2001);
  auto random_field = [&] { return random_smooth_field(grid, rng); };
  int poincare_fail = 0, gap_fail = 0;
  double gap_ratio = std::numeric_limits<double>::infinity();
  for (int n = 0; n < 100; ++n) {
    if (!poincare_check(random_field()).holds()) ++poincare_fail;
    const GapSides g = spectral_gap_check(project_off_low_modes(random_field()));
    if (!g.holds()) ++gap_fail;
    gap_ratio = std::min(gap_ratio, g.gradient / g.scaled_mass);
  }
  c.metric("poincare_failures", poincare_fail);
  c.metric("gap_failures", gap_fail);
  c.metric("min_gap_ratio", gap_ratio);
  c.require(poincare_fail == 0, "Poincare inequality failed");
  c.require(gap_fail == 0, "spectral gap inequality failed");

  double jump = 0.0;
  for (double s : {std::numbers::e, 5.0, 20.0, 100.0}) {
    const double d = 1e-7;
    jump = std::max(jump, rel(weight_w(s, kPi - d), weight_w(s, kPi + d)));
  }
  c.metric("w_jump_at_pi", jump);
  c.require(jump <= 1e-12, "w not continuous at pi");

  bool ds_ok = true, even_ok = true, a_ok = true, agrad_ok = true;
  double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0;
  const int n = 20000;
  for (int i = 1; i < n; ++i) {
    const double Z = kPi * i / n;
    for (double s : {std::numbers::e, 10.0, 100.0}) {
      if (weight_w_ds(s, Z) > 0.0) ds_ok = false;
      if (weight_w(s, Z) != weight_w(s, -Z)) even_ok = false;
      if (Z >= 0.01 && Z <= 0.99 * kPi) {
        const double r = weight_w(s, Z) * std::pow(Z, 7) * std::pow(s, shape_q(Z));
        ratio_lo = std::min(ratio_lo, r);
        ratio_hi = std::max(ratio_hi, r);
      }
    }
    const double A = vector_A(Z);
    if (A != -vector_A(-Z) || A > Z * (1.0 + 1e-15) || A < Z / kPi) a_ok = false;
    if (std::abs(A * 0.5 * std::sin(Z)) > 1.0) agrad_ok = false;
  }
  c.metric("w_size_ratio_min", ratio_lo);
  c.metric("w_size_ratio_max", ratio_hi);
  c.require(ds_ok, "d_s w > 0 somewhere");
  c.require(even_ok, "w not even");
  c.require(a_ok, "A outside |Z|/pi <= |A| <= |Z| or not odd");
  c.require(agrad_ok, "|A dG_1| above 1");
  c.require(ratio_lo > 0.0 && ratio_hi / ratio_lo < 1e4, "w |Z|^7 s^q not bounded");
  return c.finish();
}

SimulationData obtain_simulation(const Options& options) {
  SimulationData d;
  Timer t;
  if (!options.snapshot_dir.empty()) {
    d.snapshots = io::read_snapshots(options.snapshot_dir);
    d.series = io::read_series(options.snapshot_dir / "series.csv");
    d.loaded = true;
  } else {
    RunResult run = run_until_blowup(options.simulation);
    if (!run.blew_up) throw NumericalError("simulation stopped before the threshold: " + run.stop_reason);
    d.series = std::move(run.series);
    d.snapshots = std::move(run.snapshots);
    if (!options.save_dir.empty()) {
      io::write_snapshots(options.save_dir, d.snapshots);
      io::write_csv(options.save_dir / "series.csv", io::series_table(d.series));
    }
  }
  d.seconds = t.seconds();
  return d;
}

CriterionResult blowup_rates(const SimulationData& data) {
  Check c(6, "blow-up rates", 900.0);
  const BlowupFit fit = fit_blowup(data.series);
  c.metric("T_est", fit.T_est);
  c.metric("amp_exponent", fit.amp_exponent);
  c.metric("r2_amp", fit.r2_amp);
  c.metric("peak_exponent", fit.peak_exponent);
  c.metric("r2_peak", fit.r2_peak);
  c.require(std::abs(fit.amp_exponent + 1.0) <= 0.05 && fit.r2_amp >= 0.999, "amplitude exponent");
  c.require(std::abs(fit.peak_exponent + 0.5) <= 0.05 && fit.r2_peak >= 0.99, "peak exponent");
  const double dev = profile_deviation(rescaled_snapshot(data.snapshots.back()));
  c.metric("late_profile_deviation", dev);
  c.require(dev <= 0.05, "late rescaled profile off cos^2(Z/2) by more than 5%");
  return c.finish(data.loaded ? 0.0 : data.seconds);
}

CriterionResult quadratic_law(const SimulationData& data) {
  Check c(7, "final-profile quadratic law", 0.0);
  const RegularityReport reg = compact_regularity_probe(data.snapshots);
  c.metric("loglog_exponent", reg.loglog_exponent);
  c.metric("mu_proxy", reg.mu_proxy);
  c.require(std::abs(reg.loglog_exponent - 2.0) <= 0.1, "log-log exponent outside 2 +- 0.1");
  const ModulationState last = extract_state(data.snapshots.back(), 0.0);
  c.metric("mu_modulation", last.mu);
  c.require(rel(reg.mu_proxy, last.mu) <= 0.1, "mu proxy and modulation mu differ by more than 10%");
  return c.finish();
}

CriterionResult modulation_laws(const SimulationData& data) {
  Check c(8, "modulation laws", 60.0);
  // Planted data: f(Y + shift) = lambda^2 G_1(Y/(lambda^2 mu)) + 1e-4 h_3(Y).
  const double lam = 1.0 + 1e-3, mu = 1.2, shift = 0.05;
  auto grid = uniform_grid(-14.0, 14.0, 5601);
  const Field f = sample(grid, [&](double y) {
    const double Y = y - shift;
    const double Z = Y / (lam * lam * mu);
    const double g = std::abs(Z) < kPi ? std::cos(0.5 * Z) * std::cos(0.5 * Z) : 0.0;
    return lam * lam * g + 1e-4 * hermite(3, Y);
  });
  const DecomposeResult d = decompose(f, {});
  const double perr = std::max({std::abs(d.lambda - lam), std::abs(d.mu - mu), std::abs(d.shift - shift)});
  double orth = 0.0;
  for (double o : d.orthogonality) orth = std::max(orth, std::abs(o));
  c.metric("planted_param_error", perr);
  c.metric("planted_orthogonality", orth);
  c.require(perr <= 1e-8, "planted parameters not recovered to 1e-8");
  c.require(orth <= 1e-10, "orthogonality residual above 1e-10");

  const auto states = track(data.snapshots);
  const auto res = modulation_residuals(states);
  const ThirdsDecay decay = r_mu_decay(res);
  c.metric("r_mu_first_third", decay.first);
  c.metric("r_mu_last_third", decay.last);
  c.metric("r_mu_decay_ratio", decay.ratio);
  c.require(decay.ratio >= 3.0, "|r_mu| decays by less than 3");

  const double last_peak = data.snapshots.back().peak_value;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (data.snapshots[k].peak_value < 0.1 * last_peak) continue;
    const double v = states[k].lambda * std::exp(-0.5 * states[k].s);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double spread = hi / lo - 1.0;
  c.metric("lambda_exp_spread_last_decade", spread);
  c.require(spread <= 0.05, "lambda e^{-s/2} varies by more than 5% over the last decade");
  return c.finish();
}

std::vector<CriterionResult> run_all(const Options& options) {
  auto wanted = [&](int id) {
    return options.only.empty() ||
           std::find(options.only.begin(), options.only.end(), id) != options.only.end();
  };
  std::map<int, CriterionResult> results;
  std::mutex lock;
  auto store = [&](CriterionResult r) {
    std::lock_guard<std::mutex> g(lock);
    results[r.id] = std::move(r);
  };

  std::vector<std::function<void()>> tasks;
  if (wanted(6) || wanted(7) || wanted(8)) {
    tasks.emplace_back([&] {
      SimulationData data;
      try {
        data = obtain_simulation(options);
      } catch (const std::exception& e) {
        for (int id : {6, 7, 8}) {
          if (!wanted(id)) continue;
          CriterionResult r;
          r.id = id;
          r.name = id == 6 ? "blow-up rates" : id == 7 ? "final-profile quadratic law" : "modulation laws";
          r.note = std::string("simulation error: ") + e.what();
          store(std::move(r));
        }
        return;
      }
      if (wanted(6)) store(guarded(6, "blow-up rates", [&] { return blowup_rates(data); }));
      if (wanted(7)) store(guarded(7, "final-profile quadratic law", [&] { return quadratic_law(data); }));
      if (wanted(8)) store(guarded(8, "modulation laws", [&] { return modulation_laws(data); }));
    });
  }
  const std::pair<int, std::function<CriterionResult()>> single[] = {
      {1, profile_exactness},
      {2, support_constants},
      {3, profile_asymptotics},
      {4, profile_equation_residual},
      {5, spectrum},
      {9, nonlocal_oracles},
      {10, [&] { return property_suites(options.seed); }},
  };
  for (const auto& [id, f] : single)
    if (wanted(id)) tasks.emplace_back([&, id, f] { store(guarded(id, "criterion " + std::to_string(id), f)); });

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
  };
  const unsigned n = std::min<unsigned>(worker_count(options.threads),
                                        static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<CriterionResult> out;
  for (auto& [id, r] : results) out.push_back(std::move(r));
  return out;
}

std::string format_table(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  char line[256];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "[%s] %2d  %-32s %9.2f s", r.passed ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.seconds);
    os << line;
    if (!r.note.empty()) os << "  (" << r.note << ")";
    os << '\n';
  }
  return os.str();
}

}  // namespace prandtl::acceptance

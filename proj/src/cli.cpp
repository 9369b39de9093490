#include "prandtl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prandtl/acceptance.hpp"
#include "prandtl/errors.hpp"
#include "prandtl/io.hpp"
#include "prandtl/modulation.hpp"
#include "prandtl/nonlocal.hpp"
#include "prandtl/profiles.hpp"
#include "prandtl/solver.hpp"
#include "prandtl/spectral.hpp"

#ifndef PRANDTL_LAB_VERSION
#define PRANDTL_LAB_VERSION "0.1.0"
#endif

namespace prandtl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version() { return PRANDTL_LAB_VERSION; }

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "rates") return PlotKind::rates;
  if (name == "profile") return PlotKind::profile;
  if (name == "kernel") return PlotKind::kernel;
  throw ParameterError("unknown plot kind '" + name + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string python_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + items[i] + "\"";
  }
  return out + "]";
}

const char* kPlotHeader = R"py(#!/usr/bin/env python3
import csv
import math
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name)) as fh:
        rows = list(csv.reader(fh))
    cols = {h: [] for h in rows[0]}
    for r in rows[1:]:
        for h, v in zip(rows[0], r):
            cols[h].append(float(v))
    return cols

)py";

const char* kRatesBody = R"py(
s = read(CSVS[0])
t, peak = s["t"], s["peak_value"]
n = len(t)
tail = range(max(0, n - n // 5), n)
xs = [t[i] for i in tail]
ys = [1.0 / peak[i] for i in tail]
mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
T = mx - my / slope
pts = [(T - a, b) for a, b in zip(t, peak) if T - a > 0]
plt.loglog([p[0] for p in pts], [p[1] for p in pts], label="peak")
x0, y0 = pts[-1]
guide = [x0 * 10 ** (k / 10.0) for k in range(0, 31)]
plt.loglog(guide, [y0 * x0 / g for g in guide], "--", label="slope -1")
plt.xlabel("T - t")
plt.ylabel("max xi")
plt.legend()
plt.savefig(os.path.splitext(os.path.abspath(__file__))[0] + ".png", dpi=150)
)py";

const char* kProfileBody = R"py(
for name in CSVS:
    s = read(name)
    y, xi = s["y"], s["xi"]
    i = max(range(len(xi)), key=lambda j: xi[j])
    peak, ys = xi[i], y[i]
    half = 0.5 * peak
    l = i
    while l > 0 and xi[l] > half:
        l -= 1
    r = i
    while r < len(xi) - 1 and xi[r] > half:
        r += 1
    def cross(a, b):
        return y[a] + (half - xi[a]) * (y[b] - y[a]) / (xi[b] - xi[a])
    hwhm = 0.5 * (cross(r - 1, r) - cross(l, l + 1))
    lam = math.sqrt(peak)
    mu = 2.0 * hwhm / (lam * math.pi)
    Z = [(v - ys) / (lam * mu) for v in y]
    keep = [j for j in range(len(Z)) if abs(Z[j]) <= 1.5 * math.pi]
    plt.plot([Z[j] for j in keep], [xi[j] / peak for j in keep], label=name)
zz = [-math.pi + 2 * math.pi * j / 400 for j in range(401)]
plt.plot(zz, [math.cos(z / 2) ** 2 for z in zz], "k--", label="cos^2(Z/2)")
plt.xlabel("Z")
plt.ylabel("F")
plt.legend(fontsize=6)
plt.savefig(os.path.splitext(os.path.abspath(__file__))[0] + ".png", dpi=150)
)py";

const char* kKernelBody = R"py(
s = read(CSVS[0])
plt.semilogy(s["y"], s["k"], label="k")
if "k_prim1" in s:
    plt.semilogy(s["y"][1:], s["k_prim1"][1:], label="k^(-1)")
plt.xlabel("y")
plt.legend()
plt.savefig(os.path.splitext(os.path.abspath(__file__))[0] + ".png", dpi=150)
)py";

}  // namespace

void emit_plot_script(const std::vector<fs::path>& csvs, PlotKind kind, const fs::path& script) {
  if (csvs.empty()) throw ParameterError("plot script needs at least one CSV");
  const fs::path base = script.parent_path().empty() ? fs::path(".") : script.parent_path();
  std::vector<std::string> names;
  for (const auto& p : csvs) {
    if (!fs::is_regular_file(p)) throw FileError("missing CSV for plot script: " + p.string());
    names.push_back(fs::relative(p, base).generic_string());
  }
  std::string text = kPlotHeader;
  text += "CSVS = " + python_list(names) + "\n";
  switch (kind) {
    case PlotKind::rates: text += kRatesBody; break;
    case PlotKind::profile: text += kProfileBody; break;
    case PlotKind::kernel: text += kKernelBody; break;
  }
  io::write_text(script, text);
}

namespace {

class Clock {
 public:
  Clock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Exit code 2 after the report is written.
struct ValidationFailure {};

struct Common {
  std::string out_dir;
  std::string config;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out-dir", c.out_dir, "Output directory (created if missing)")->required();
  sub->add_option("--config", c.config, "Flat key=value file; flags given on the command line win");
  sub->add_option("--seed", c.seed, "Random seed");
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::map<std::string, std::string> entries;
  try {
    entries = io::read_config(path);
  } catch (const FileError& e) {
    throw UsageError(e.what());
  }
  for (const auto& [raw, value] : entries) {
    const std::string key = normalize_key(raw);
    if (key == "config" || key == "out-dir") throw UsageError("config key '" + raw + "' is not allowed in a config file");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("unknown config key '" + raw + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    opt->add_result(value);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + raw + "': " + e.what());
    }
  }
}

json config_json(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names[0] == "help") continue;
    if (opt->count() > 0) {
      const auto results = opt->results();
      cfg[names[0]] = results.size() == 1 ? json(results[0]) : json(results);
    } else {
      cfg[names[0]] = opt->get_default_str();
    }
  }
  return cfg;
}

json base_report(const std::string& command, const CLI::App* sub, const Common& c) {
  json r;
  r["command"] = command;
  r["config"] = config_json(sub);
  r["seed"] = c.seed;
  r["version"] = version();
  return r;
}

void finish_report(json& report, const Clock& clock, const fs::path& path) {
  report["runtime_seconds"] = clock.seconds();
  io::write_text(path, report.dump(2) + "\n");
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

// --- profile ---------------------------------------------------------------

struct ProfileArgs {
  Common common;
  int k = 1;
  std::size_t points = 4001;
  double tol = 1e-10;
  std::string out;
};

void run_profile(const ProfileArgs& a, const CLI::App* sub) {
  Clock clock;
  const fs::path dir = a.common.out_dir;
  io::ensure_directory(dir);
  const ProfileTable t = build_profile(a.k, a.points, a.tol);
  io::Table csv{{"Z", "G", "dG"}, {}};
  const std::size_t n = t.Z_samples.size();
  for (std::size_t j = n - 1; j >= 1; --j)
    csv.rows.push_back({-t.Z_samples[j], t.G_samples[j], -t.dG_samples[j]});
  for (std::size_t j = 0; j < n; ++j) csv.rows.push_back({t.Z_samples[j], t.G_samples[j], t.dG_samples[j]});
  const std::string name = a.out.empty() ? "profile_k" + std::to_string(a.k) + ".csv" : a.out;
  io::write_csv(dir / name, csv);

  const AsymptoticFit fit = fit_asymptotics(t);
  const double residual = profile_residual(t);
  const double m = 2.0 * a.k;
  json r = base_report("profile", sub, a.common);
  r["k"] = a.k;
  r["a_k"] = t.a_k;
  r["a_k_statement"] = support_half_width_statement(a.k);
  r["center_coeff"] = t.center_coeff;
  r["center_coeff_statement"] = center_coeff_statement(a.k);
  r["edge_coeff"] = t.edge_coeff;
  r["edge_coeff_statement"] = edge_coeff_statement(a.k);
  r["edge_exponent"] = t.edge_exponent;
  r["mass"] = profile_mass(t);
  r["residual"] = residual;
  r["fit"] = {{"center_exponent", fit.center_exponent},
              {"center_coeff", fit.center_coeff},
              {"edge_exponent", fit.edge_exponent},
              {"edge_coeff", fit.edge_coeff}};
  const double e_ce = rel_err(fit.center_exponent, m);
  const double e_cc = rel_err(fit.center_coeff, t.center_coeff);
  const double e_ee = rel_err(fit.edge_exponent, t.edge_exponent);
  const double e_ec = rel_err(fit.edge_coeff, t.edge_coeff);
  r["fit_errors"] = {{"center_exponent", e_ce},
                     {"center_coeff", e_cc},
                     {"edge_exponent", e_ee},
                     {"edge_coeff", e_ec}};
  const bool ok = residual <= 1e-6 && e_ce <= 0.01 && e_cc <= 0.02 && e_ee <= 0.01;
  r["passed"] = ok;
  r["csv"] = name;
  finish_report(r, clock, dir / ("profile_k" + std::to_string(a.k) + ".json"));
  std::printf("k=%d a_k=%.15g residual=%.3e %s\n", a.k, t.a_k, residual, ok ? "ok" : "FAILED");
  if (!ok) throw ValidationFailure{};
}

// --- spectral-check --------------------------------------------------------

struct SpectralArgs {
  Common common;
  int max_index = 6;
  int fields = 100;
  double tolerance = 1e-4;
};

void run_spectral(const SpectralArgs& a, const CLI::App* sub) {
  Clock clock;
  const fs::path dir = a.common.out_dir;
  io::ensure_directory(dir);
  if (a.max_index < 0 || a.max_index > HermiteFrame::kMaxIndex) throw ParameterError("max-index out of range");
  if (a.fields < 1) throw ParameterError("fields must be positive");
  io::Table csv{{"i", "eigenvalue", "residual"}, {}};
  json eig = json::array();
  bool ok = true;
  std::printf("%3s %12s %14s\n", "i", "eigenvalue", "residual");
  for (int i = 0; i <= a.max_index; ++i) {
    const double res = eigen_residual(i);
    csv.rows.push_back({double(i), eigenvalue(i), res});
    eig.push_back({{"i", i}, {"eigenvalue", eigenvalue(i)}, {"residual", res}});
    ok = ok && res <= a.tolerance;
    std::printf("%3d %12.6f %14.6e\n", i, eigenvalue(i), res);
  }
  io::write_csv(dir / "spectral.csv", csv);

  std::mt19937_64 rng(a.common.seed);
  auto grid = uniform_grid(-10.0, 10.0, 2001);
  int poincare = 0, gap = 0;
  for (int n = 0; n < a.fields; ++n) {
    if (poincare_check(acceptance::random_smooth_field(grid, rng)).holds()) ++poincare;
    if (spectral_gap_check(project_off_low_modes(acceptance::random_smooth_field(grid, rng))).holds()) ++gap;
  }
  ok = ok && poincare == a.fields && gap == a.fields;
  json r = base_report("spectral-check", sub, a.common);
  r["eigen"] = eig;
  r["fields"] = a.fields;
  r["poincare_pass"] = poincare;
  r["gap_pass"] = gap;
  r["passed"] = ok;
  finish_report(r, clock, dir / "spectral_report.json");
  std::printf("%s\n", json{{"poincare_pass", poincare}, {"gap_pass", gap}, {"fields", a.fields}}.dump().c_str());
  if (!ok) throw ValidationFailure{};
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  Common common;
  SolverConfig config;
};

std::vector<fs::path> late_snapshot_files(const fs::path& dir, const std::vector<SolverState>& snaps,
                                          std::size_t count) {
  std::vector<std::size_t> late;
  const double last = snaps.back().peak_value;
  for (std::size_t k = 0; k < snaps.size(); ++k)
    if (snaps[k].peak_value >= 0.1 * last) late.push_back(k);
  std::vector<fs::path> out;
  const std::size_t n = std::min(count, late.size());
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t idx = late[n == 1 ? late.size() - 1 : j * (late.size() - 1) / (n - 1)];
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%05zu.csv", idx);
    out.push_back(dir / name);
  }
  return out;
}

void run_simulate(SimulateArgs& a, const CLI::App* sub) {
  Clock clock;
  const fs::path dir = a.common.out_dir;
  io::ensure_directory(dir);
  a.config.seed = a.common.seed;
  a.config.validate();
  const RunResult run = run_until_blowup(a.config);
  io::write_csv(dir / "series.csv", io::series_table(run.series));
  io::write_snapshots(dir, run.snapshots);

  json r = base_report("simulate", sub, a.common);
  r["blew_up"] = run.blew_up;
  r["stop_reason"] = run.stop_reason;
  r["steps"] = run.final_state.step_count;
  r["remesh_count"] = run.remesh_count;
  r["final_t"] = run.final_state.t;
  r["final_peak"] = run.final_state.peak_value;
  r["snapshots"] = run.snapshots.size();
  bool ok = run.blew_up;
  try {
    const BlowupFit f = fit_blowup(run.series);
    r["fit"] = {{"T_est", f.T_est},           {"amp_exponent", f.amp_exponent},
                {"peak_exponent", f.peak_exponent}, {"r2_amp", f.r2_amp},
                {"r2_peak", f.r2_peak},       {"r2_inverse", f.r2_inverse},
                {"window_start", f.window_start}, {"window_points", f.window_points}};
    r["late_profile_deviation"] = profile_deviation(rescaled_snapshot(run.snapshots.back()));
    const RegularityReport reg = compact_regularity_probe(run.snapshots);
    r["regularity"] = {{"sup_norm", reg.sup_norm},
                       {"final_decade_growth", reg.final_decade_growth},
                       {"quadratic_coeff", reg.quadratic_coeff},
                       {"loglog_exponent", reg.loglog_exponent},
                       {"mu_proxy", reg.mu_proxy},
                       {"fit_window", {reg.fit_lo, reg.fit_hi}}};
  } catch (const Error& e) {
    r["fit_error"] = e.what();
    ok = false;
  }
  r["passed"] = ok;
  emit_plot_script({dir / "series.csv"}, PlotKind::rates, dir / "plot_rates.py");
  emit_plot_script(late_snapshot_files(dir, run.snapshots, 5), PlotKind::profile, dir / "plot_profile.py");
  finish_report(r, clock, dir / "blowup_fit.json");
  std::printf("blew_up=%d steps=%zu t=%.10g peak=%.6g remeshes=%zu\n", int(run.blew_up),
              run.final_state.step_count, run.final_state.t, run.final_state.peak_value, run.remesh_count);
  if (r.contains("fit"))
    std::printf("T_est=%.10g amp_exponent=%.5f peak_exponent=%.5f\n", r["fit"]["T_est"].get<double>(),
                r["fit"]["amp_exponent"].get<double>(), r["fit"]["peak_exponent"].get<double>());
  if (!ok) throw ValidationFailure{};
}

// --- modulate --------------------------------------------------------------

struct ModulateArgs {
  Common common;
  std::string snapshot_dir;
  TrappedOptions trapped;
};

void run_modulate(const ModulateArgs& a, const CLI::App* sub) {
  Clock clock;
  const fs::path dir = a.common.out_dir;
  io::ensure_directory(dir);
  const auto snaps = io::read_snapshots(a.snapshot_dir);
  const auto states = track(snaps);
  const auto res = modulation_residuals(states);

  io::Table csv{{"s", "t", "lambda", "mu", "a", "y_star", "newton_residual", "r_lambda", "r_mu",
                 "ext_norm_1", "ext_norm_2", "ext_norm_3", "ext_norm_4"},
                {}};
  std::size_t trapped_rows = 0, evaluated = 0;
  json last_check;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& st = states[k];
    ExteriorNorms n{kNaN, kNaN, kNaN, kNaN};
    try {
      n = snapshot_exterior_norms(snaps[k], st, a.trapped.M);
      const TrappedCheck c = trapped_check(st, n, a.trapped);
      ++evaluated;
      if (c.all()) ++trapped_rows;
      last_check = {{"s", c.s},           {"lambda", c.lambda_ok}, {"mu", c.mu_ok},
                    {"a", c.a_ok},        {"l2", c.l2_ok},         {"h1", c.h1_ok},
                    {"scaled_l2", c.scaled_l2}, {"all", c.all()}};
    } catch (const Error&) {
    }
    csv.rows.push_back({st.s, st.t, st.lambda, st.mu, st.a, st.y_star, st.newton_residual,
                        res[k].r_lambda, res[k].r_mu, n.left_l2, n.right_l2, n.left_h1, n.right_h1});
  }
  io::write_csv(dir / "modulation.csv", csv);

  const ThirdsDecay decay = r_mu_decay(res);
  const double last_peak = snaps.back().peak_value;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (snaps[k].peak_value < 0.1 * last_peak) continue;
    const double v = states[k].lambda * std::exp(-0.5 * states[k].s);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double spread = hi / lo - 1.0;
  const double mu_end = states.back().mu, mu_mid = states[states.size() / 2].mu;
  const double mu_drift = std::abs(mu_end - mu_mid) / mu_end;

  json r = base_report("modulate", sub, a.common);
  r["states"] = states.size();
  r["r_mu_decay"] = {{"first_third", decay.first}, {"last_third", decay.last}, {"ratio", decay.ratio}};
  r["lambda_exp_spread_last_decade"] = spread;
  r["mu_end"] = mu_end;
  r["mu_drift_mid_to_end"] = mu_drift;
  bool ok = decay.ratio >= 3.0 && spread <= 0.05 && mu_drift <= 0.05;
  if (states.size() >= 3) {
    const std::size_t m = states.size() - 1 - states.size() / 6;
    const std::span<const SolverState> sl(snaps.data() + m - 1, 3);
    const std::span<const ModulationState> ss(states.data() + m - 1, 3);
    const FrameResidual fr = frame_residual(sl, ss);
    FrameResidualOptions corrupt;
    corrupt.lambda_s_scale = 2.0;
    const FrameResidual fc = frame_residual(sl, ss, corrupt);
    r["frame_residual"] = {{"s", states[m].s}, {"normalized", fr.residual}, {"corrupted_lambda_s", fc.residual}};
    ok = ok && fr.residual <= 0.05;
  }
  r["trapped"] = {{"K", a.trapped.K},
                  {"M", a.trapped.M},
                  {"nu", a.trapped.nu},
                  {"rows_evaluated", evaluated},
                  {"rows_trapped", trapped_rows},
                  {"last", last_check},
                  {"note", "diagnostic; not part of the exit status"}};
  r["passed"] = ok;
  finish_report(r, clock, dir / "modulation_report.json");
  std::printf("states=%zu r_mu_decay=%.3g lambda_spread=%.3g mu_end=%.6g trapped_rows=%zu/%zu\n", states.size(),
              decay.ratio, spread, mu_end, trapped_rows, evaluated);
  if (!ok) throw ValidationFailure{};
}

// --- nonlocal-check --------------------------------------------------------

struct NonlocalArgs {
  Common common;
  double x_max = 5.0;
  std::size_t points = 1001;
  double dt = 1e-3;
  double t = 1.0;
  double kernel_max = 100.0;
};

void run_nonlocal(const NonlocalArgs& a, const CLI::App* sub) {
  Clock clock;
  const fs::path dir = a.common.out_dir;
  io::ensure_directory(dir);
  if (!(a.kernel_max > 0.0)) throw ParameterError("kernel-max must be positive");

  io::Table kt{{"y", "k", "k_prim1"}, {}};
  for (int i = 0; i <= 1000; ++i) {
    const double y = a.kernel_max * i / 1000.0;
    kt.rows.push_back({y, kernel(y), kernel_primitive(1, y)});
  }
  io::write_csv(dir / "kernel.csv", kt);

  auto grid = uniform_grid(0.0, a.x_max, a.points);
  const std::pair<const char*, std::function<double(double)>> data[] = {
      {"sin(x)+1/2", [](double x) { return std::sin(x) + 0.5; }},
      {"x exp(-x^2)", [](double x) { return x * std::exp(-x * x); }},
      {"1/(1+x^2)", [](double x) { return 1.0 / (1.0 + x * x); }},
  };
  json cmp = json::array();
  double worst = 0.0;
  for (std::size_t d = 0; d < 3; ++d) {
    const Field u0 = sample(grid, data[d].second);
    const Field g = green_solution(u0, a.t, grid);
    const Field s = direct_solve_nonlocal(u0, a.t, a.dt);
    double err = 0.0, scale = 0.0;
    io::Table ct{{"x", "green", "direct", "abs_err"}, {}};
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(g[i] - s[i]));
      scale = std::max(scale, std::abs(g[i]));
      ct.rows.push_back({g.node(i), g[i], s[i], std::abs(g[i] - s[i])});
    }
    if (d == 0) io::write_csv(dir / "comparison.csv", ct);
    cmp.push_back({{"datum", data[d].first}, {"relative_linf", err / scale}});
    worst = std::max(worst, err / scale);
  }

  double ode = 0.0;
  for (double y : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0})
    ode = std::max(ode, kernel_ode_check(y) / std::max(1.0, kernel(y)));

  auto vgrid = uniform_grid(0.0, 1.0, 401);
  const Field v0 = sample(vgrid, [](double x) { return x * x * std::exp(-x); });
  std::vector<double> times;
  for (int i = 0; i <= 12; ++i) times.push_back(4.0 + 0.5 * i);
  const DecayFit fit = compact_decay(v0, 1.0, times);
  io::Table dtab{{"t", "sup_compact", "fitted_slope"}, {}};
  for (std::size_t i = 0; i < fit.times.size(); ++i) dtab.rows.push_back({fit.times[i], fit.sup_compact[i], fit.slope});
  io::write_csv(dir / "decay.csv", dtab);
  emit_plot_script({dir / "kernel.csv"}, PlotKind::kernel, dir / "plot_kernel.py");

  const bool v_cmp = worst <= 1e-4, v_ode = ode <= 1e-12, v_decay = std::abs(fit.slope + 2.0) <= 0.2;
  json r = base_report("nonlocal-check", sub, a.common);
  r["comparison"] = cmp;
  r["kernel_ode_residual"] = ode;
  r["decay"] = {{"ell", 2}, {"compact_L", 1.0}, {"slope", fit.slope}, {"r2", fit.r2}};
  r["verdicts"] = {{"green_vs_direct", v_cmp}, {"kernel_ode", v_ode}, {"decay_slope", v_decay}};
  const bool ok = v_cmp && v_ode && v_decay;
  r["passed"] = ok;
  finish_report(r, clock, dir / "nonlocal_report.json");
  std::printf("green_vs_direct=%.3e kernel_ode=%.3e decay_slope=%.4f %s\n", worst, ode, fit.slope,
              ok ? "ok" : "FAILED");
  if (!ok) throw ValidationFailure{};
}

// --- accept ----------------------------------------------------------------

struct AcceptArgs {
  Common common;
  std::string snapshot_dir;
  bool save_run = false;
  unsigned threads = 0;
  std::vector<int> only;
};

void run_accept(const AcceptArgs& a, const CLI::App* sub) {
  Clock clock;
  const fs::path dir = a.common.out_dir;
  io::ensure_directory(dir);
  acceptance::Options o;
  o.seed = a.common.seed;
  o.threads = a.threads;
  o.only = a.only;
  if (!a.snapshot_dir.empty()) o.snapshot_dir = a.snapshot_dir;
  if (a.save_run) {
    o.save_dir = dir / "run";
    io::ensure_directory(o.save_dir);
  }
  const auto results = acceptance::run_all(o);
  std::fputs(acceptance::format_table(results).c_str(), stdout);

  json r = base_report("accept", sub, a.common);
  json list = json::array();
  bool ok = true;
  for (const auto& c : results) {
    json m = json::object();
    for (const auto& [k, v] : c.metrics) m[k] = v;
    list.push_back({{"id", c.id},
                    {"name", c.name},
                    {"passed", c.passed},
                    {"seconds", c.seconds},
                    {"budget_seconds", c.budget_seconds},
                    {"metrics", m},
                    {"note", c.note}});
    ok = ok && c.passed;
  }
  r["criteria"] = list;
  r["threads"] = acceptance::worker_count(a.threads);
  r["passed"] = ok;
  finish_report(r, clock, dir / "acceptance_report.json");
  const auto passed = std::count_if(results.begin(), results.end(), [](const auto& c) { return c.passed; });
  std::printf("%zd/%zu criteria passed\n", static_cast<std::ptrdiff_t>(passed), results.size());
  if (!ok) throw ValidationFailure{};
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Reduced Prandtl blow-up laboratory", "prandtl_lab"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  ProfileArgs pa;
  auto* prof = app.add_subcommand("profile", "Tabulate G_k and report its constants");
  add_common(prof, pa.common);
  prof->add_option("--k", pa.k, "Profile order")->check(CLI::PositiveNumber);
  prof->add_option("--points", pa.points, "Table size");
  prof->add_option("--tol", pa.tol, "Distance of the last sample to the support edge");
  prof->add_option("--out", pa.out, "CSV file name inside the output directory");

  SpectralArgs sa;
  auto* spec = app.add_subcommand("spectral-check", "Eigen-residuals of L and the Poincare/gap inequalities");
  add_common(spec, sa.common);
  spec->add_option("--max-index", sa.max_index, "Largest Hermite index checked");
  spec->add_option("--fields", sa.fields, "Random fields per inequality");
  spec->add_option("--tolerance", sa.tolerance, "Eigen-residual tolerance");

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "Run the reduced Prandtl solver up to the blow-up threshold");
  add_common(sim, ma.common);
  SolverConfig& c = ma.config;
  sim->add_option("--lambda0", c.lambda0, "Initial scale lambda0");
  sim->add_option("--cfl", c.cfl, "CFL number");
  sim->add_option("--threshold", c.blowup_threshold, "Stop when max xi exceeds this (0: 1e5 lambda0^2)");
  sim->add_option("--snapshot-every", c.snapshot_every, "Extra snapshot every N steps (0: off)");
  sim->add_option("--snapshot-log-step", c.snapshot_log_step, "Snapshot when log(peak) grew by this");
  sim->add_option("--series-log-step", c.series_log_step, "Series row when log(peak) grew by this");
  sim->add_option("--perturbation", c.perturbation_amplitude, "Random perturbation amplitude (units lambda0^2)");
  sim->add_option("--amplitude-scale", c.amplitude_scale, "Factor on the initial bump");
  sim->add_option("--grid-spacing", c.grid_spacing, "Mesh spacing");
  sim->add_option("--grid-stretch", c.grid_stretch, "Geometric stretch of the mesh");
  sim->add_option("--y-max-factor", c.y_max_factor, "Initial y_max in units of lambda0 pi");
  sim->add_option("--remesh-band", c.remesh_band, "Fraction of the domain watched for truncation");
  sim->add_option("--truncation-threshold", c.truncation_threshold, "Largest |xi| tolerated in that band");
  sim->add_option("--max-dt", c.max_dt, "Largest time step");
  sim->add_option("--max-steps", c.max_steps, "Step limit");

  ModulateArgs ga;
  auto* mod = app.add_subcommand("modulate", "Extract modulation parameters from stored snapshots");
  add_common(mod, ga.common);
  mod->add_option("--snapshot-dir", ga.snapshot_dir, "Directory written by simulate")->required();
  mod->add_option("--K", ga.trapped.K, "Trapped-regime constant K");
  mod->add_option("--M", ga.trapped.M, "Exterior cut-off constant M");
  mod->add_option("--nu", ga.trapped.nu, "Trapped-regime exponent loss nu");

  NonlocalArgs na;
  auto* nl = app.add_subcommand("nonlocal-check", "Green kernel, direct stepping and transported decay");
  add_common(nl, na.common);
  nl->add_option("--x-max", na.x_max, "Right end of the x domain");
  nl->add_option("--points", na.points, "Grid points");
  nl->add_option("--dt", na.dt, "Direct stepping time step");
  nl->add_option("--t", na.t, "Comparison time");
  nl->add_option("--kernel-max", na.kernel_max, "Right end of the kernel table");

  AcceptArgs aa;
  auto* acc = app.add_subcommand("accept", "Run the acceptance suite");
  add_common(acc, aa.common);
  acc->add_option("--snapshot-dir", aa.snapshot_dir, "Reuse a stored simulation instead of running one");
  acc->add_flag("--save-run", aa.save_run, "Store the simulation under <out-dir>/run");
  acc->add_option("--threads", aa.threads, "Worker threads (0: hardware, capped by PRANDTL_LAB_THREADS)");
  acc->add_option("--only", aa.only, "Criterion ids to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const CLI::App* s : app.get_subcommands()) sub = s;
    std::cerr << (sub != nullptr ? sub->help() : app.help());
    return 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "profile") {
      apply_config(sub, pa.common.config);
      run_profile(pa, sub);
    } else if (name == "spectral-check") {
      apply_config(sub, sa.common.config);
      run_spectral(sa, sub);
    } else if (name == "simulate") {
      apply_config(sub, ma.common.config);
      run_simulate(ma, sub);
    } else if (name == "modulate") {
      apply_config(sub, ga.common.config);
      run_modulate(ga, sub);
    } else if (name == "nonlocal-check") {
      apply_config(sub, na.common.config);
      run_nonlocal(na, sub);
    } else {
      apply_config(sub, aa.common.config);
      run_accept(aa, sub);
    }
  } catch (const ValidationFailure&) {
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace prandtl::cli

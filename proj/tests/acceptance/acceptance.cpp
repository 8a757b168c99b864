// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "../support/upwind_oracle.hpp"
#include "vortexlayer/cli_io.hpp"
#include "vortexlayer/elliptic.hpp"
#include "vortexlayer/error.hpp"
#include "vortexlayer/transport.hpp"
#include "vortexlayer/vanishing_viscosity.hpp"

namespace fs = std::filesystem;
using namespace vortexlayer;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void verdict(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %-22s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

double manufactured_l2_error(int n) {
  constexpr double pi = std::numbers::pi;
  const Grid g(n, n, 1.0, 1.0);
  std::vector<double> source(g.cell_count());
  std::vector<double> exact(g.cell_count());
  for (std::size_t c = 0; c < source.size(); ++c) {
    const Vec2 p = g.center(c);
    exact[c] = std::sin(pi * p.x) * std::sin(pi * p.y);
    source[c] = (1.0 + 2.0 * pi * pi) * exact[c];
  }
  const BoundaryTrace zero(g.boundary_faces().size(), 0.0);
  const ScalarField h = solve_screened_poisson(g, source, zero);
  double sum = 0.0;
  for (std::size_t c = 0; c < source.size(); ++c) sum += (h.values[c] - exact[c]) * (h.values[c] - exact[c]);
  return std::sqrt(sum * g.cell_area());
}

void elliptic_convergence() {
  const auto start = Clock::now();
  const double e32 = manufactured_l2_error(32);
  const double e64 = manufactured_l2_error(64);
  const double elapsed = seconds_since(start);
  const double ratio = e32 / e64;
  verdict("elliptic-convergence", ratio >= 3.5 && ratio <= 4.5 && elapsed < 10.0,
          fmt("L2 error %.3e -> %.3e, ratio %.4f (want [3.5, 4.5]), %.2f s (want < 10)", e32, e64, ratio, elapsed));
}

void maximum_principle() {
  RunConfig config = scenario_config("kellersegel");
  config.nx = config.ny = 64;
  config.nu = 0.01;
  config.t_final = 1.0;
  config.boundary.b0 = FacePreset::constant(0.3);
  config.boundary.b1 = 0.0;
  const SweepConfig spec = make_sweep_config(config);
  const Grid grid(config.nx, config.ny, config.lx, config.ly);
  RunOptions options = spec.base.options;
  options.keep_snapshots = false;
  const auto start = Clock::now();
  const Trajectory traj = run(grid, spec.base.model, config.nu, spec.base.boundary, spec.base.initial(grid), options);
  const double elapsed = seconds_since(start);
  double lo = 1.0;
  double hi = 0.0;
  for (const StepReport& s : traj.steps) {
    lo = std::min(lo, s.min_omega);
    hi = std::max(hi, s.max_omega);
  }
  verdict("maximum-principle", lo >= -1e-12 && hi <= 1.0 + 1e-12 && elapsed < 60.0,
          fmt("%zu steps, min %.3e, max %.17g, %.2f s (want < 60)", traj.steps.size(), lo, hi, elapsed));
}

void conservation_and_steady(const SweepReport& sweep) {
  double worst = 0.0;
  for (const SweepRun& r : sweep.runs) worst = std::max(worst, r.ok ? r.summary.max_relative_mass_residual : INFINITY);

  RunConfig steady = scenario_config("steady");
  const fs::path dir = fs::temp_directory_path() / "vortexlayer_acceptance_steady";
  fs::remove_all(dir);
  const RunOutcome out = run_to_directory(steady, dir);
  fs::remove_all(dir);
  worst = std::max(worst, out.summary.max_relative_mass_residual);
  const bool ok = worst <= 1e-12 && out.summary.steps >= 100 && out.max_drift == 0.0;
  verdict("conservation", ok,
          fmt("max relative mass residual %.3e over sweep and steady runs; steady state drift %.17g after %d steps",
              worst, out.max_drift, out.summary.steps));
}

void upwind_oracle() {
  const FluxModel model = FluxModel::mean_field();
  double worst = 0.0;
  for (double c : {0.7, -1.3}) {
    const Grid g(41, 5, 1.0, 0.3);
    std::vector<double> w(g.cell_count());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(k * k % 97));
    const double b = 0.4;
    const FrozenCoefficients coeffs = testing::uniform_x_velocity(g, c, b);
    const double dt = stable_dt(g, model, std::abs(c), 0.0, 0.0, 0.9);
    std::vector<double> next(w.size());
    conservative_update(g, model, 0.0, coeffs, w, dt, next);
    const std::vector<double> oracle = testing::upwind_rows(g, w, c, b, dt);
    for (std::size_t k = 0; k < w.size(); ++k) worst = std::max(worst, std::abs(next[k] - oracle[k]));
  }
  verdict("upwind-oracle", worst <= 1e-14, fmt("max cell difference %.3e (want <= 1e-14)", worst));
}

void sweep_bounds(const SweepReport& sweep) {
  // The first four runs are nu = 0.1, 0.05, 0.025, 0.0125.
  const std::size_t n = std::min<std::size_t>(4, sweep.runs.size());
  bool all_ok = n == 4;
  double sup_first = 0.0;
  double sup_max = 0.0;
  double e_min = INFINITY;
  double e_max = 0.0;
  std::string sups;
  std::string energies;
  for (std::size_t i = 0; i < n; ++i) {
    const SweepRun& r = sweep.runs[i];
    all_ok = all_ok && r.ok;
    if (!r.ok) continue;
    if (i == 0) sup_first = r.summary.sup_abs_omega;
    sup_max = std::max(sup_max, r.summary.sup_abs_omega);
    e_min = std::min(e_min, r.summary.energy_bound());
    e_max = std::max(e_max, r.summary.energy_bound());
    sups += fmt(" %.4g", r.summary.sup_abs_omega);
    energies += fmt(" %.4g", r.summary.energy_bound());
  }
  verdict("uniform-linf", all_ok && sup_max <= 2.0 * sup_first,
          fmt("sup|omega| per nu:%s; max %.4g vs limit %.4g", sups.c_str(), sup_max, 2.0 * sup_first));
  verdict("uniform-energy", all_ok && e_min > 0.0 && e_max <= 3.0 * e_min,
          fmt("sqrt(nu)|grad omega| per nu:%s; spread %.3f (want <= 3)", energies.c_str(), e_max / e_min));
}

void cauchy(const SweepReport& sweep) {
  std::size_t l1 = sweep.norms.size();
  for (std::size_t p = 0; p < sweep.norms.size(); ++p)
    if (sweep.norms[p] == 1) l1 = p;
  if (l1 == sweep.norms.size() || sweep.runs.size() != 6) {
    verdict("cauchy-proxy", false, "sweep lacks six runs or the L1 norm");
    return;
  }
  std::printf("     L1 distance matrix (rows/cols nu =");
  for (const SweepRun& r : sweep.runs) std::printf(" %g", r.nu);
  std::printf("):\n");
  for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
    std::printf("     ");
    for (std::size_t j = 0; j < sweep.runs.size(); ++j) std::printf(" %10.3e", sweep.get(l1, i, j));
    std::printf("\n");
  }
  std::string consecutive;
  for (std::size_t i = 0; i + 1 < sweep.runs.size(); ++i) consecutive += fmt(" %.3e", sweep.get(l1, i, i + 1));
  verdict("cauchy-proxy", sweep.all_ok() && sweep.cauchy[l1],
          fmt("consecutive L1 distances:%s; last three pairs nonincreasing", consecutive.c_str()));
}

void entropy(const SweepReport& sweep) {
  if (!sweep.entropy_tolerance) {
    verdict("entropy", false, "no tolerance was fitted");
    return;
  }
  bool ok = sweep.all_ok();
  std::string detail = fmt("C1 %.3e C2 %.3e;", sweep.entropy_tolerance->c1, sweep.entropy_tolerance->c2);
  for (const SweepRun& r : sweep.runs) {
    if (!r.entropy) {
      ok = false;
      detail += fmt(" nu %g: no audit;", r.nu);
      continue;
    }
    const bool run_ok = r.entropy->pass() && r.entropy->entries.size() == 54u * 128u && r.audit_seconds < 120.0;
    ok = ok && run_ok;
    detail += fmt(" nu %g: min %.2e tol %.2e %.1fs%s;", r.nu, r.entropy->minimum, r.entropy->tolerance,
                  r.audit_seconds, run_ok ? "" : " (fail)");
  }
  verdict("entropy", ok, detail);
}

void kinetic(const SweepReport& sweep) {
  bool ok = sweep.all_ok();
  double worst_ratio = 0.0;
  double worst_rho = -INFINITY;
  for (const SweepRun& r : sweep.runs) {
    if (!r.kinetic || r.kinetic_spacing <= 0.0) {
      ok = false;
      continue;
    }
    worst_ratio = std::max(worst_ratio, r.kinetic->max_reconstruction_error / r.kinetic_spacing);
    worst_rho = std::max(worst_rho, r.kinetic->max_rho_violation);
  }

  RunConfig config = scenario_config("nucleation");
  const fs::path dir = fs::temp_directory_path() / "vortexlayer_acceptance_kinetic";
  fs::remove_all(dir);
  run_to_directory(config, dir);
  const KineticReport report = kinetic_directory(dir);
  fs::remove_all(dir);
  worst_ratio = std::max(worst_ratio, report.snapshots.max_reconstruction_error / report.delta_xi);
  worst_rho = std::max(worst_rho, report.snapshots.max_rho_violation);
  std::string interior;
  for (std::size_t k = 0; k < report.windows.size(); ++k)
    interior += fmt(" eps %.4g: %.4e", report.windows[k], report.interior[k]);
  ok = ok && worst_ratio <= 1.0 && worst_rho <= 0.0 && report.windows.size() >= 3 && report.interior_decreasing();
  verdict("kinetic", ok,
          fmt("reconstruction error / dxi %.3f (want <= 1), rho check %.3e (want <= 0), interior trace%s",
              worst_ratio, worst_rho, interior.c_str()));
}

}  // namespace

int main() {
  try {
    elliptic_convergence();
    maximum_principle();
    upwind_oracle();

    RunConfig config = scenario_config("nucleation");
    config.nu_list = geometric_viscosities(0.1, 6);
    config.grid_rule = "nu/4";
    config.audit = true;
    config.kinetic = true;
    const auto start = Clock::now();
    const SweepReport sweep = run_sweep(make_sweep_config(config));
    std::printf("     six-run sweep finished in %.1f s\n", seconds_since(start));
    for (const SweepRun& r : sweep.runs)
      if (!r.ok) std::printf("     run nu %g failed: %s\n", r.nu, r.error.c_str());

    sweep_bounds(sweep);
    cauchy(sweep);
    entropy(sweep);
    kinetic(sweep);
    conservation_and_steady(sweep);
  } catch (const std::exception& e) {
    std::printf("FAIL %-22s aborted: %s\n", "harness", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

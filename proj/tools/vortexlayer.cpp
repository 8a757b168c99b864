#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vortexlayer/vortexlayer.h"

namespace {

struct Failure {
  int code;
};

void check(vl_status status) {
  if (status != VL_OK) {
    std::fprintf(stderr, "error (%s): %s\n", vl_status_name(status), vl_last_error());
    throw Failure{static_cast<int>(status)};
  }
}

std::string get(const vl_config* config, const char* section, const char* key) {
  char* value = nullptr;
  check(vl_config_get(config, section, key, &value));
  std::string out(value);
  vl_string_free(value);
  return out;
}

struct ConfigFlags {
  std::string config_path;
  std::string scenario;
  std::string model;
  std::optional<std::string> nu;
  std::optional<int> nx;
  std::optional<std::string> t_final;
  std::string nu_list;
  std::string grid_rule;
  std::string out;
  bool print_config = false;
  bool audit = false;
  bool kinetic = false;
};

void add_config_flags(CLI::App* app, ConfigFlags& f, bool sweep) {
  app->add_option("--config", f.config_path, "config file")->check(CLI::ExistingFile);
  app->add_option("--scenario", f.scenario, "scenario preset: custom, steady, nucleation, kellersegel");
  app->add_option("--model", f.model, "meanfield or kellersegel");
  app->add_option("--nu", f.nu, "viscosity");
  app->add_option("--nx", f.nx, "cells along x; ny follows the aspect ratio");
  app->add_option("--t-final", f.t_final, "final time");
  app->add_option("--out", f.out, "output directory")->required();
  app->add_flag("--print-config", f.print_config, "print the effective config and exit");
  app->add_flag("--audit", f.audit, "run the entropy audit");
  app->add_flag("--kinetic", f.kinetic, "run the kinetic checks");
  if (sweep) {
    app->add_option("--nu-list", f.nu_list, "comma separated viscosities, nonincreasing");
    app->add_option("--grid-rule", f.grid_rule, "nu/<ratio> or fixed:<nx>");
  }
}

vl_config* build_config(const ConfigFlags& f) {
  vl_config* config = nullptr;
  if (!f.config_path.empty()) {
    check(vl_config_load_file(f.config_path.c_str(), &config));
    if (!f.scenario.empty()) {
      vl_config_free(config);
      std::fprintf(stderr, "error: --scenario and --config are mutually exclusive\n");
      throw Failure{2};
    }
  } else {
    check(vl_config_new(f.scenario.empty() ? "custom" : f.scenario.c_str(), &config));
  }
  try {
    if (!f.model.empty()) check(vl_config_set(config, "run", "model", f.model.c_str()));
    if (f.nu) check(vl_config_set(config, "run", "nu", f.nu->c_str()));
    if (f.t_final) check(vl_config_set(config, "run", "t_final", f.t_final->c_str()));
    if (f.nx) {
      const double lx = std::stod(get(config, "grid", "lx"));
      const double ly = std::stod(get(config, "grid", "ly"));
      const int ny = std::max(2, static_cast<int>(std::lround(*f.nx * ly / lx)));
      check(vl_config_set(config, "grid", "nx", std::to_string(*f.nx).c_str()));
      check(vl_config_set(config, "grid", "ny", std::to_string(ny).c_str()));
    }
    if (!f.nu_list.empty()) check(vl_config_set(config, "sweep", "nu_list", f.nu_list.c_str()));
    if (!f.grid_rule.empty()) check(vl_config_set(config, "sweep", "grid_rule", f.grid_rule.c_str()));
    if (f.audit) check(vl_config_set(config, "run", "audit", "true"));
    if (f.kinetic) check(vl_config_set(config, "run", "kinetic", "true"));
  } catch (...) {
    vl_config_free(config);
    throw;
  }
  return config;
}

bool print_config_if_asked(const ConfigFlags& f, const vl_config* config) {
  if (!f.print_config) return false;
  char* text = nullptr;
  check(vl_config_print(config, &text));
  std::fputs(text, stdout);
  vl_string_free(text);
  return true;
}

int do_run(const ConfigFlags& f) {
  vl_config* config = build_config(f);
  std::unique_ptr<vl_config, decltype(&vl_config_free)> guard(config, vl_config_free);
  if (print_config_if_asked(f, config)) return 0;
  vl_run_summary s{};
  check(vl_run(config, f.out.c_str(), &s));
  std::printf("steps %d, snapshots %zu\n", s.steps, s.snapshots);
  std::printf("omega range [%.17g, %.17g], sup|omega| %.17g\n", s.min_omega, s.max_omega, s.sup_abs_omega);
  std::printf("energy sqrt(nu)*|grad omega| %.17g\n", s.energy);
  std::printf("max relative mass residual %.3e\n", s.max_relative_mass_residual);
  std::printf("final max drift %.17g\n", s.max_drift);
  return 0;
}

int do_sweep(const ConfigFlags& f) {
  vl_config* config = build_config(f);
  std::unique_ptr<vl_config, decltype(&vl_config_free)> guard(config, vl_config_free);
  if (print_config_if_asked(f, config)) return 0;
  vl_sweep_summary s{};
  check(vl_sweep(config, f.out.c_str(), &s));
  std::printf("runs %zu, failed %zu\n", s.runs, s.failed_runs);
  std::printf("sup|omega| first %.6g, max %.6g\n", s.sup_abs_omega_first, s.sup_abs_omega_max);
  std::printf("energy range [%.6g, %.6g]\n", s.energy_min, s.energy_max);
  if (s.cauchy_l1 >= 0) std::printf("L1 Cauchy proxy %s\n", s.cauchy_l1 ? "holds" : "fails");
  if (s.entropy_pass >= 0) std::printf("entropy audit %s\n", s.entropy_pass ? "pass" : "fail");
  std::printf("wrote sweep_report.csv, distances.csv, layers.csv to %s\n", f.out.c_str());
  return s.failed_runs == 0 ? 0 : 1;
}

int do_audit(const std::string& dir) {
  vl_audit_summary s{};
  check(vl_audit(dir.c_str(), &s));
  std::printf("entropy residual minimum %.6e over %zu entries\n", s.minimum, s.entries);
  std::printf("tolerance %.6e (c1 %.6g, c2 %.6g, dx %.6g, dt %.6g): %s\n", s.tolerance, s.c1, s.c2, s.dx, s.dt,
              s.pass ? "pass" : "fail");
  std::printf("sup|omega| %.6g, energy %.6g\n", s.sup_abs_omega, s.energy);
  std::printf("measure constant %.6g, levels over the bound %zu\n", s.measure_constant, s.measure_failures);
  return s.pass ? 0 : 1;
}

int do_kinetic(const std::string& dir) {
  vl_kinetic_summary s{};
  check(vl_kinetic(dir.c_str(), &s));
  std::printf("reconstruction error %.6e (bound %.6e)\n", s.reconstruction_error, s.delta_xi);
  std::printf("rho bound violation %.6e, f monotone in xi: %s\n", s.rho_violation, s.monotone ? "yes" : "no");
  for (std::size_t k = 0; k < s.window_count; ++k) {
    std::printf("interior functional eps=%.6g: %.6e\n", s.windows[k], s.interior[k]);
  }
  std::printf("interior functional nonincreasing: %s\n", s.interior_decreasing ? "yes" : "no");
  const bool ok = s.reconstruction_error <= s.delta_xi && s.rho_violation <= 0.0 && s.monotone;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume simulator and verification harness for a nonlocal vortex-layer transport model"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run one simulation into an output directory");
  add_config_flags(run, run_flags, false);

  ConfigFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "vanishing-viscosity sweep");
  add_config_flags(sweep, sweep_flags, true);

  std::string audit_dir;
  CLI::App* audit = app.add_subcommand("audit", "entropy audit of a finished run directory");
  audit->add_option("--out", audit_dir, "run directory")->required();

  std::string kinetic_dir;
  CLI::App* kinetic = app.add_subcommand("kinetic", "kinetic checks on a finished run directory");
  kinetic->add_option("--out", kinetic_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return do_run(run_flags);
    if (sweep->parsed()) return do_sweep(sweep_flags);
    if (audit->parsed()) return do_audit(audit_dir);
    if (kinetic->parsed()) return do_kinetic(kinetic_dir);
  } catch (const Failure& f) {
    return f.code == 0 ? 1 : f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

#include "vortexlayer/vortexlayer.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "vortexlayer/cli_io.hpp"
#include "vortexlayer/error.hpp"

struct vl_config {
  vortexlayer::RunConfig config;
};

namespace {

using vortexlayer::Error;
using vortexlayer::ErrorKind;

thread_local std::string last_error;

vl_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return VL_ERR_INVALID_ARGUMENT;
    case ErrorKind::Parse: return VL_ERR_PARSE;
    case ErrorKind::Validation: return VL_ERR_VALIDATION;
    case ErrorKind::Io: return VL_ERR_IO;
    case ErrorKind::SolverDivergence: return VL_ERR_SOLVER_DIVERGENCE;
    case ErrorKind::BlowUp: return VL_ERR_BLOW_UP;
    case ErrorKind::NoSnapshots: return VL_ERR_NO_SNAPSHOTS;
    case ErrorKind::MissingData: return VL_ERR_MISSING_DATA;
  }
  return VL_ERR_INTERNAL;
}

template <class Fn>
vl_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return VL_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return VL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return VL_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) vortexlayer::fail(ErrorKind::InvalidArgument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* vl_status_name(vl_status status) {
  switch (status) {
    case VL_OK: return "ok";
    case VL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VL_ERR_PARSE: return "parse error";
    case VL_ERR_VALIDATION: return "validation error";
    case VL_ERR_IO: return "i/o error";
    case VL_ERR_SOLVER_DIVERGENCE: return "solver divergence";
    case VL_ERR_BLOW_UP: return "blow-up";
    case VL_ERR_NO_SNAPSHOTS: return "no snapshots";
    case VL_ERR_MISSING_DATA: return "missing data";
    case VL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* vl_last_error(void) { return last_error.c_str(); }

void vl_string_free(char* text) { std::free(text); }

vl_status vl_config_new(const char* scenario, vl_config** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = nullptr;
    auto config = std::make_unique<vl_config>();
    config->config = vortexlayer::scenario_config(scenario ? scenario : "custom");
    *out = config.release();
  });
}

vl_status vl_config_load_file(const char* path, vl_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path or output handle is null");
    *out = nullptr;
    auto config = std::make_unique<vl_config>();
    config->config = vortexlayer::load_config(path);
    *out = config.release();
  });
}

vl_status vl_config_load_text(const char* text, vl_config** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "text or output handle is null");
    *out = nullptr;
    auto config = std::make_unique<vl_config>();
    config->config = vortexlayer::parse_config(text);
    *out = config.release();
  });
}

vl_status vl_config_set(vl_config* config, const char* section, const char* key, const char* value) {
  return guarded([&] {
    require(config && section && key && value, "null argument");
    vortexlayer::apply_config_key(config->config, section, key, value);
  });
}

vl_status vl_config_get(const vl_config* config, const char* section, const char* key, char** value) {
  return guarded([&] {
    require(config && section && key && value, "null argument");
    *value = nullptr;
    std::istringstream text(vortexlayer::print_config(config->config));
    const std::string header = "[" + std::string(section) + "]";
    const std::string prefix = std::string(key) + " = ";
    std::string current;
    std::string line;
    while (std::getline(text, line)) {
      if (!line.empty() && line.front() == '[') {
        current = line;
      } else if (current == header && line.starts_with(prefix)) {
        *value = copy_string(line.substr(prefix.size()));
        return;
      }
    }
    vortexlayer::fail(ErrorKind::InvalidArgument, "no key '" + std::string(key) + "' in [" + section + "]");
  });
}

vl_status vl_config_print(const vl_config* config, char** text) {
  return guarded([&] {
    require(config && text, "null argument");
    *text = copy_string(vortexlayer::print_config(config->config));
  });
}

void vl_config_free(vl_config* config) { delete config; }

vl_status vl_run(const vl_config* config, const char* out_dir, vl_run_summary* summary) {
  return guarded([&] {
    require(config && out_dir, "null argument");
    const vortexlayer::RunOutcome outcome = vortexlayer::run_to_directory(config->config, out_dir);
    if (summary) {
      const vortexlayer::RunSummary& s = outcome.summary;
      *summary = vl_run_summary{s.steps,        outcome.snapshots, s.sup_abs_omega,   s.min_omega,
                                s.max_omega,    s.energy_bound(),  s.initial_mass,    s.final_mass,
                                s.max_relative_mass_residual,      outcome.max_drift};
    }
  });
}

vl_status vl_audit(const char* run_dir, vl_audit_summary* summary) {
  return guarded([&] {
    require(run_dir != nullptr, "null directory");
    const vortexlayer::AuditOutcome a = vortexlayer::audit_directory(run_dir);
    if (summary) {
      *summary = vl_audit_summary{a.entropy.entries.size(),
                                  a.entropy.minimum,
                                  a.entropy.tolerance,
                                  a.entropy.dx,
                                  a.entropy.dt,
                                  a.entropy.model.c1,
                                  a.entropy.model.c2,
                                  a.entropy.pass() ? 1 : 0,
                                  a.bounds.sup_abs_omega,
                                  a.bounds.energy,
                                  a.measure_constant,
                                  a.measure_failures};
    }
  });
}

vl_status vl_kinetic(const char* run_dir, vl_kinetic_summary* summary) {
  return guarded([&] {
    require(run_dir != nullptr, "null directory");
    const vortexlayer::KineticReport r = vortexlayer::kinetic_directory(run_dir);
    if (summary) {
      vl_kinetic_summary s{};
      s.reconstruction_error = r.snapshots.max_reconstruction_error;
      s.delta_xi = r.delta_xi;
      s.rho_violation = r.snapshots.max_rho_violation;
      s.monotone = r.snapshots.monotone ? 1 : 0;
      s.window_count = std::min<std::size_t>(3, r.windows.size());
      for (std::size_t k = 0; k < s.window_count; ++k) {
        s.windows[k] = r.windows[k];
        s.interior[k] = r.interior[k];
      }
      s.interior_decreasing = r.interior_decreasing() ? 1 : 0;
      *summary = s;
    }
  });
}

vl_status vl_sweep(const vl_config* config, const char* out_dir, vl_sweep_summary* summary) {
  return guarded([&] {
    require(config && out_dir, "null argument");
    const vortexlayer::SweepReport report = vortexlayer::sweep_to_directory(config->config, out_dir);
    if (!summary) return;
    vl_sweep_summary s{};
    s.runs = report.runs.size();
    s.energy_min = s.energy_max = -1.0;
    bool first = true;
    for (const vortexlayer::SweepRun& r : report.runs) {
      if (!r.ok) {
        ++s.failed_runs;
        continue;
      }
      const double energy = r.summary.energy_bound();
      if (first) {
        s.sup_abs_omega_first = r.summary.sup_abs_omega;
        s.energy_min = s.energy_max = energy;
        first = false;
      }
      s.sup_abs_omega_max = std::max(s.sup_abs_omega_max, r.summary.sup_abs_omega);
      s.energy_min = std::min(s.energy_min, energy);
      s.energy_max = std::max(s.energy_max, energy);
    }
    s.cauchy_l1 = -1;
    for (std::size_t p = 0; p < report.norms.size(); ++p) {
      if (report.norms[p] == 1) s.cauchy_l1 = report.cauchy[p] ? 1 : 0;
    }
    s.entropy_pass = -1;
    if (report.entropy_tolerance) {
      s.entropy_pass = 1;
      for (const vortexlayer::SweepRun& r : report.runs) {
        if (!r.entropy || !r.entropy->pass()) s.entropy_pass = 0;
      }
    }
    *summary = s;
  });
}

}  // extern "C"

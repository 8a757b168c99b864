/*
 * C interface to the vortexlayer simulator.
 *
 * Every function returns a vl_status. On failure the message of the most
 * recent error on the calling thread is available from vl_last_error().
 * Strings handed out by the library are released with vl_string_free().
 */
#ifndef VORTEXLAYER_H
#define VORTEXLAYER_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define VL_API __declspec(dllexport)
#else
#define VL_API __attribute__((visibility("default")))
#endif

typedef enum vl_status {
  VL_OK = 0,
  VL_ERR_INVALID_ARGUMENT = 1,
  VL_ERR_PARSE = 2,
  VL_ERR_VALIDATION = 3,
  VL_ERR_IO = 4,
  VL_ERR_SOLVER_DIVERGENCE = 5,
  VL_ERR_BLOW_UP = 6,
  VL_ERR_NO_SNAPSHOTS = 7,
  VL_ERR_MISSING_DATA = 8,
  VL_ERR_INTERNAL = 9
} vl_status;

typedef struct vl_config vl_config;

typedef struct vl_run_summary {
  int steps;
  size_t snapshots;
  double sup_abs_omega;
  double min_omega;
  double max_omega;
  double energy; /* sqrt(nu) * ||grad omega|| over space-time */
  double initial_mass;
  double final_mass;
  double max_relative_mass_residual;
  double max_drift; /* max over cells of |omega(T) - omega(0)| */
} vl_run_summary;

typedef struct vl_audit_summary {
  size_t entries;
  double minimum; /* smallest residual over test functions and levels */
  double tolerance;
  double dx;
  double dt;
  double c1;
  double c2;
  int pass;
  double sup_abs_omega;
  double energy;
  double measure_constant;
  size_t measure_failures;
} vl_audit_summary;

typedef struct vl_kinetic_summary {
  double reconstruction_error;
  double delta_xi;
  double rho_violation;
  int monotone;
  size_t window_count;
  double windows[3];
  double interior[3];
  int interior_decreasing;
} vl_kinetic_summary;

typedef struct vl_sweep_summary {
  size_t runs;
  size_t failed_runs;
  double sup_abs_omega_first; /* at the largest viscosity */
  double sup_abs_omega_max;
  double energy_min;
  double energy_max;
  int cauchy_l1; /* 1 when the L1 proxy holds, -1 when L1 is not among the norms */
  int entropy_pass; /* 1 pass, 0 fail, -1 audit disabled */
} vl_sweep_summary;

VL_API const char* vl_status_name(vl_status status);
VL_API const char* vl_last_error(void);
VL_API void vl_string_free(char* text);

/* Scenario preset by name: custom, steady, nucleation, kellersegel. */
VL_API vl_status vl_config_new(const char* scenario, vl_config** out);
VL_API vl_status vl_config_load_file(const char* path, vl_config** out);
VL_API vl_status vl_config_load_text(const char* text, vl_config** out);
/* Sets one key exactly as a config file line would; the config is unchanged on failure. */
VL_API vl_status vl_config_set(vl_config* config, const char* section, const char* key, const char* value);
VL_API vl_status vl_config_get(const vl_config* config, const char* section, const char* key, char** value);
VL_API vl_status vl_config_print(const vl_config* config, char** text);
VL_API void vl_config_free(vl_config* config);

VL_API vl_status vl_run(const vl_config* config, const char* out_dir, vl_run_summary* summary);
VL_API vl_status vl_audit(const char* run_dir, vl_audit_summary* summary);
VL_API vl_status vl_kinetic(const char* run_dir, vl_kinetic_summary* summary);
VL_API vl_status vl_sweep(const vl_config* config, const char* out_dir, vl_sweep_summary* summary);

#ifdef __cplusplus
}
#endif

#endif

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vortexlayer/flux_models.hpp"
#include "vortexlayer/geometry.hpp"
#include "vortexlayer/transport.hpp"

namespace vortexlayer {

/// Uniform grid of levels xi on [xi_min, xi_max]. Level k sits at the
/// midpoint of the k-th of n_xi equal subintervals.
struct KineticGrid {
  double xi_min = -1.0;
  double xi_max = 1.0;
  int n_xi = 128;
  double radius = 0.0;  ///< R, the sup |omega| the grid was sized for

  double spacing() const { return (xi_max - xi_min) / n_xi; }
  double level(int k) const { return xi_min + (k + 0.5) * spacing(); }
  double lower_edge(int k) const { return xi_min + k * spacing(); }
};

/// Levels on [-R-1, R+1]. Throws for n_xi < 8 or negative R.
KineticGrid make_kinetic_grid(double radius, int n_xi = 128);

/// sign_+(omega - xi): 1 when omega > xi, 0 when omega <= xi.
inline double chi(double omega, double xi) { return omega > xi ? 1.0 : 0.0; }

/// f sampled on (level, cell), stored level-major: f[k * cells + c].
/// Built from a field it holds indicator values; averaged traces give values
/// in [0,1].
struct KineticSlice {
  KineticGrid levels;
  std::size_t cells = 0;
  std::vector<double> f;

  double at(int k, std::size_t c) const { return f[static_cast<std::size_t>(k) * cells + c]; }
  double& at(int k, std::size_t c) { return f[static_cast<std::size_t>(k) * cells + c]; }
};

KineticSlice make_slice(const KineticGrid& levels, std::span<const double> omega);

/// int_0^inf f ds - int_{-inf}^0 (1-f) ds by midpoint quadrature over the
/// level intervals (f = 0 above the grid, 1 below it).
double reconstruct_omega(const KineticSlice& slice, std::size_t cell);

/// rho(xi_k) = xi_k f(xi_k) + int_{xi_k}^inf f ds.
double rho(const KineticSlice& slice, int k, std::size_t cell);

/// F = f(1-f), elementwise.
std::vector<double> defect_F(const KineticSlice& slice);

/// max over (level, cell) of |rho - omega f| - 2 R f (1-f) - dxi; nonpositive
/// when the bound holds with one level spacing of slack.
double rho_bound_check(const KineticSlice& slice, std::span<const double> omega);

/// Time average of f over snapshots with t <= window (trapezoid in time).
/// Throws Error(MissingData) when fewer than `min_snapshots` fall inside.
KineticSlice trace_time_average(std::span<const Snapshot> snapshots, const KineticGrid& levels, double window,
                                std::size_t min_snapshots = 4);

/// Average of f along the inward normal over `depth`, per (snapshot, face, level).
struct BoundaryKineticTrace {
  KineticGrid levels;
  std::size_t snapshots = 0;
  std::size_t faces = 0;
  int depth_cells = 0;
  std::vector<double> f;  ///< [(s * faces + face) * n_xi + k]

  double at(std::size_t s, std::size_t face, int k) const {
    return f[(s * faces + face) * static_cast<std::size_t>(levels.n_xi) + k];
  }
};

/// Throws Error(InvalidArgument) when depth < 2 cells or larger than half the
/// domain width along the normal.
BoundaryKineticTrace trace_boundary_average(const Grid& grid, std::span<const Snapshot> snapshots,
                                            const KineticGrid& levels, double depth);

struct TraceDefectValues {
  double interior = 0.0;  ///< int (f0 - f0^2) dxi dx
  double boundary = 0.0;  ///< int |g'(xi) v.n|_- (fG - fG^2) dxi dt dx
};

/// `boundary_vn[s][face]` is v.n at snapshot s; `times` are the snapshot times.
TraceDefectValues trace_defect_functionals(const Grid& grid, const FluxModel& model, const KineticSlice& f0,
                                const BoundaryKineticTrace& f_gamma,
                                std::span<const std::vector<double>> boundary_vn, std::span<const double> times);

/// Exact checks of the kinetic identities over a trajectory.
struct KineticSnapshotAudit {
  double max_reconstruction_error = 0.0;
  double max_rho_violation = -1.0;  ///< from rho_bound_check; <= 0 passes
  bool monotone = true;             ///< f nonincreasing in xi everywhere
  bool support = true;              ///< f = 0 above R, 1 below -R
};

KineticSnapshotAudit audit_kinetic_snapshots(std::span<const Snapshot> snapshots, const KineticGrid& levels);

/// Trapezoid weights for integrating over the given sample times.
std::vector<double> trapezoid_weights(std::span<const double> times);

}  // namespace vortexlayer

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vortexlayer/boundary.hpp"
#include "vortexlayer/elliptic.hpp"
#include "vortexlayer/flux_models.hpp"
#include "vortexlayer/geometry.hpp"

namespace vortexlayer {

/// Runs whose |omega| exceeds this are aborted.
inline constexpr double kBlowUpThreshold = 1e6;

/// Snapshot of the coupled fields at one time level. h always satisfies the
/// screened-Poisson problem for omega with the trace a(t).
struct State {
  double t = 0.0;
  ScalarField omega;
  ScalarField h;
  ScalarField h_a;
  VectorField v;
  std::vector<double> dh_dn;  ///< per boundary face
  FluxModel model;
  double nu = 0.0;
  BoundaryData boundary;
};

struct StepReport {
  double t = 0.0;  ///< time at the end of the step
  double dt = 0.0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  double advective_outflow = 0.0;  ///< outward advective flux integrated over the boundary, per unit time
  double diffusive_outflow = 0.0;  ///< outward Robin flux integrated over the boundary, per unit time
  double min_omega = 0.0;
  double max_omega = 0.0;
  double robin = 0.0;              ///< M(v) used in the step
  double dissipation = 0.0;        ///< nu * int |grad omega|^2 at the start of the step
  double dt_grad_h = 0.0;          ///< L2 norm of the time difference of grad h over the step, divided by dt
  double h_second_difference = 0.0;
  int elliptic_iterations = 0;

  /// Net inflow rate; the mass update equals dt times this.
  double boundary_flux_sum() const { return -(advective_outflow + diffusive_outflow); }
  double mass_residual() const { return (mass_after - mass_before) - dt * boundary_flux_sum(); }
  double mass_scale() const;
};

/// Local Lax-Friedrichs flux across a face with normal velocity v_n pointing
/// from the left state to the right state.
double numerical_face_flux(const FluxModel& model, double omega_left, double omega_right, double v_n);

/// nu * d omega/dn at a boundary face from the Robin law
/// nu d omega/dn + M (omega - b) = 0, with omega taken from the owner cell.
inline double robin_diffusive_flux(double /*nu*/, double omega_face_cell, double b_val, double robin) {
  return -robin * (omega_face_cell - b_val);
}

/// Time step keeping the update a monotone (positive-coefficient)
/// combination: dt = cfl / (2 K vmax / dx + 4 nu / dx^2 + 2 M / dx) on square
/// cells, with a 1e-30 guard against a vanishing denominator.
double stable_dt(const Grid& grid, const FluxModel& model, double vmax, double nu, double robin, double cfl);
double stable_dt(const Grid& grid, const FluxModel& model, const VectorField& v, double nu, double robin, double cfl);

/// Conservative explicit update with all coefficients frozen.
struct FrozenCoefficients {
  VectorField v;                 ///< cell-centered velocity; interior faces average neighbors
  std::vector<double> boundary_vn;  ///< v.n on each boundary face
  std::vector<double> b;            ///< inflow value on each boundary face
  double robin = 0.0;
};

StepReport conservative_update(const Grid& grid, const FluxModel& model, double nu, const FrozenCoefficients& coeffs,
                               std::span<const double> omega, double dt, std::span<double> omega_next);

/// Advection-diffusion update on a strip that is periodic in x and closed
/// (zero flux) in y, with a constant frozen velocity.
std::vector<double> periodic_strip_update(const Grid& grid, const FluxModel& model, std::span<const double> omega,
                                          Vec2 velocity, double nu, double dt);

/// Explicit time integration of the viscous problem. Holds the grid and a
/// reusable elliptic solver; one instance per run.
class TransportSolver {
 public:
  TransportSolver(Grid grid, FluxModel model, double nu, BoundaryData boundary, EllipticOptions elliptic = {});

  const Grid& grid() const { return grid_; }
  const FluxModel& model() const { return model_; }
  double nu() const { return nu_; }
  const BoundaryData& boundary() const { return boundary_; }

  /// Builds a consistent state (h, h_a, v, dh/dn) at t = 0.
  State initial_state(std::vector<double> omega0);

  /// Largest stable step for the current state.
  double stable_dt(const State& state, double cfl) const;

  /// Advances by dt: Robin coefficient and nucleation values from the
  /// current h, conservative update of omega, then a fresh elliptic solve at
  /// the new time. Throws Error(BlowUp) on non-finite or |omega| > 1e6.
  StepReport step(State& state, double dt);

 private:
  void refresh_fields(State& state, StepReport* report);

  Grid grid_;
  FluxModel model_;
  double nu_;
  BoundaryData boundary_;
  EllipticSolver elliptic_;
  ScalarField h_a_;
};

/// Cell-centered gradient of a field: central inside, one-sided at the boundary.
VectorField cell_gradient(const Grid& grid, std::span<const double> values);

double total_mass(const Grid& grid, std::span<const double> omega);

struct Snapshot {
  double t = 0.0;
  std::vector<double> omega;
  std::vector<double> h;
  std::optional<VectorField> grad_omega;
};

struct RunOptions {
  double t_final = 1.0;
  double output_interval = 0.1;
  double cfl = 0.9;
  bool store_gradients = false;
  bool keep_snapshots = true;  ///< keep snapshots in the returned trajectory
};

struct RunSummary {
  int steps = 0;
  double sup_abs_omega = 0.0;
  double min_omega = 0.0;
  double max_omega = 0.0;
  double dissipation_integral = 0.0;  ///< nu * int_0^T int |grad omega|^2
  double max_dt = 0.0;
  double max_robin = 0.0;
  double max_relative_mass_residual = 0.0;
  double initial_mass = 0.0;
  double final_mass = 0.0;
  double max_dt_grad_h = 0.0;
  double max_h_second_difference = 0.0;
  /// sqrt(nu) * ||grad omega||_{L2(space-time)}
  double energy_bound() const;
};

struct Trajectory {
  Grid grid;
  FluxModel model;
  double nu = 0.0;
  BoundaryData boundary;
  std::vector<Snapshot> snapshots;
  std::vector<StepReport> steps;
  RunSummary summary;
};

using SnapshotSink = std::function<void(const Snapshot&, const State&)>;

/// Integrates from omega0 to t_final, emitting a snapshot at t = 0 and at every
/// multiple of the output interval (and at t_final). On blow-up the sink
/// receives the offending state before the error propagates.
Trajectory run(const Grid& grid, const FluxModel& model, double nu, const BoundaryData& boundary,
               std::vector<double> omega0, const RunOptions& options, const SnapshotSink& sink = {});

}  // namespace vortexlayer

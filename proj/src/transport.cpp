#include "vortexlayer/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vortexlayer/error.hpp"

namespace vortexlayer {

namespace {

constexpr double kGuard = 1e-30;

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double face_velocity_max(const VectorField& v, std::span<const double> boundary_vn) {
  double vmax = 0.0;
  for (std::size_t c = 0; c < v.x.size(); ++c) vmax = std::max({vmax, std::abs(v.x[c]), std::abs(v.y[c])});
  return std::max(vmax, max_abs(boundary_vn));
}

}  // namespace

double StepReport::mass_scale() const {
  return std::max({std::abs(mass_before), std::abs(mass_after),
                   dt * (std::abs(advective_outflow) + std::abs(diffusive_outflow)), 1e-300});
}

double numerical_face_flux(const FluxModel& model, double omega_left, double omega_right, double v_n) {
  const double alpha = model.lipschitz() * std::abs(v_n);
  return 0.5 * (model.g(omega_left) + model.g(omega_right)) * v_n - 0.5 * alpha * (omega_right - omega_left);
}

double stable_dt(const Grid& grid, const FluxModel& model, double vmax, double nu, double robin, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) fail(ErrorKind::InvalidArgument, "cfl must lie in (0,1]");
  const double h = std::min(grid.dx(), grid.dy());
  const double rate = 2.0 * model.lipschitz() * vmax / h +
                      2.0 * nu * (1.0 / (grid.dx() * grid.dx()) + 1.0 / (grid.dy() * grid.dy())) +
                      2.0 * robin / h;
  return cfl / (rate + kGuard);
}

double stable_dt(const Grid& grid, const FluxModel& model, const VectorField& v, double nu, double robin, double cfl) {
  return stable_dt(grid, model, face_velocity_max(v, {}), nu, robin, cfl);
}

StepReport conservative_update(const Grid& grid, const FluxModel& model, double nu, const FrozenCoefficients& coeffs,
                               std::span<const double> omega, double dt, std::span<double> omega_next) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double dx = grid.dx();
  const double dy = grid.dy();
  const double vol = grid.cell_area();
  const std::size_t n = grid.cell_count();

  StepReport report;
  report.dt = dt;
  report.robin = coeffs.robin;

  // Net outward flux times face length, per cell.
  std::vector<double> outflow(n, 0.0);
  double dissipation = 0.0;

  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const std::size_t r = grid.index(i, j);
      const std::size_t l = r - 1;
      const double vn = 0.5 * (coeffs.v.x[l] + coeffs.v.x[r]);
      const double jump = omega[r] - omega[l];
      const double flux = numerical_face_flux(model, omega[l], omega[r], vn) - nu * jump / dx;
      outflow[l] += flux * dy;
      outflow[r] -= flux * dy;
      dissipation += jump * jump * (dy / dx);
    }
  }
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t r = grid.index(i, j);
      const std::size_t l = r - nx;
      const double vn = 0.5 * (coeffs.v.y[l] + coeffs.v.y[r]);
      const double jump = omega[r] - omega[l];
      const double flux = numerical_face_flux(model, omega[l], omega[r], vn) - nu * jump / dy;
      outflow[l] += flux * dx;
      outflow[r] -= flux * dx;
      dissipation += jump * jump * (dx / dy);
    }
  }

  const auto faces = grid.boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const BoundaryFace& face = faces[f];
    const double w = omega[face.owner];
    const double vn = coeffs.boundary_vn[f];
    const double exterior = inflow_indicator(model, w, vn) ? coeffs.b[f] : w;
    const double advective = numerical_face_flux(model, w, exterior, vn);
    const double diffusive = -robin_diffusive_flux(nu, w, coeffs.b[f], coeffs.robin);
    outflow[face.owner] += (advective + diffusive) * face.area;
    report.advective_outflow += advective * face.area;
    report.diffusive_outflow += diffusive * face.area;
  }

  const double lambda = dt / vol;
  double mass_before = 0.0;
  double mass_after = 0.0;
  double lo = omega.empty() ? 0.0 : omega[0];
  double hi = lo;
  for (std::size_t c = 0; c < n; ++c) {
    const double next = omega[c] - lambda * outflow[c];
    omega_next[c] = next;
    mass_before += omega[c];
    mass_after += next;
    lo = std::min(lo, next);
    hi = std::max(hi, next);
  }
  report.mass_before = mass_before * vol;
  report.mass_after = mass_after * vol;
  report.min_omega = lo;
  report.max_omega = hi;
  report.dissipation = nu * dissipation;
  return report;
}

std::vector<double> periodic_strip_update(const Grid& grid, const FluxModel& model, std::span<const double> omega,
                                          Vec2 velocity, double nu, double dt) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double dx = grid.dx();
  const double dy = grid.dy();
  std::vector<double> outflow(grid.cell_count(), 0.0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t r = grid.index(i, j);
      const std::size_t l = grid.index((i + nx - 1) % nx, j);
      const double flux = numerical_face_flux(model, omega[l], omega[r], velocity.x) - nu * (omega[r] - omega[l]) / dx;
      outflow[l] += flux * dy;
      outflow[r] -= flux * dy;
    }
  }
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t r = grid.index(i, j);
      const std::size_t l = r - nx;
      const double flux = numerical_face_flux(model, omega[l], omega[r], velocity.y) - nu * (omega[r] - omega[l]) / dy;
      outflow[l] += flux * dx;
      outflow[r] -= flux * dx;
    }
  }
  std::vector<double> next(grid.cell_count());
  const double lambda = dt / grid.cell_area();
  for (std::size_t c = 0; c < next.size(); ++c) next[c] = omega[c] - lambda * outflow[c];
  return next;
}

TransportSolver::TransportSolver(Grid grid, FluxModel model, double nu, BoundaryData boundary,
                                 EllipticOptions elliptic)
    : grid_(std::move(grid)),
      model_(model),
      nu_(nu),
      boundary_(std::move(boundary)),
      elliptic_(grid_, elliptic) {
  if (!(nu_ >= 0.0)) fail(ErrorKind::InvalidArgument, "viscosity must be nonnegative");
  h_a_ = solve_background(grid_, boundary_.a_trace(grid_, 0.0), elliptic);
}

void TransportSolver::refresh_fields(State& state, StepReport* report) {
  const BoundaryTrace trace = boundary_.a_trace(grid_, state.t);
  EllipticResult solved = elliptic_.solve(state.omega.values, trace, state.h.values);
  state.h.values = std::move(solved.h.values);
  state.h.t = state.t;
  state.omega.t = state.t;
  state.v = velocity(grid_, state.h.values, trace);
  state.dh_dn = normal_derivative(grid_, state.h.values, trace);
  if (report) {
    report->elliptic_iterations = solved.iterations;
    report->h_second_difference = second_difference_ratio(grid_, state.h.values, state.omega.values, trace);
  }
}

State TransportSolver::initial_state(std::vector<double> omega0) {
  if (omega0.size() != grid_.cell_count()) fail(ErrorKind::InvalidArgument, "initial omega has wrong length");
  for (double w : omega0) {
    if (!std::isfinite(w)) fail(ErrorKind::InvalidArgument, "initial omega is not finite");
  }
  State state;
  state.model = model_;
  state.nu = nu_;
  state.boundary = boundary_;
  state.omega.values = std::move(omega0);
  state.h_a = h_a_;
  refresh_fields(state, nullptr);
  return state;
}

double TransportSolver::stable_dt(const State& state, double cfl) const {
  const double vmax = face_velocity_max(state.v, state.dh_dn);
  return vortexlayer::stable_dt(grid_, model_, vmax, nu_, robin_coefficient(model_, state.v), cfl);
}

StepReport TransportSolver::step(State& state, double dt) {
  FrozenCoefficients coeffs;
  coeffs.robin = robin_coefficient(model_, state.v);
  coeffs.b = nucleation_trace(boundary_, grid_, state.t, state.dh_dn);
  coeffs.boundary_vn.resize(state.dh_dn.size());
  for (std::size_t f = 0; f < state.dh_dn.size(); ++f) coeffs.boundary_vn[f] = -state.dh_dn[f];
  coeffs.v = std::move(state.v);

  std::vector<double> next(grid_.cell_count());
  StepReport report = conservative_update(grid_, model_, nu_, coeffs, state.omega.values, dt, next);
  VectorField old_v = std::move(coeffs.v);

  state.omega.values = std::move(next);
  state.t += dt;
  report.t = state.t;

  for (double w : state.omega.values) {
    if (!std::isfinite(w) || std::abs(w) > kBlowUpThreshold) {
      state.v = std::move(old_v);
      std::ostringstream msg;
      msg << "omega blew up at t=" << state.t << " (max |omega| = " << max_abs(state.omega.values)
          << ", threshold " << kBlowUpThreshold << ")";
      fail(ErrorKind::BlowUp, msg.str());
    }
  }

  refresh_fields(state, &report);
  double diff = 0.0;
  for (std::size_t c = 0; c < old_v.x.size(); ++c) {
    const double ex = state.v.x[c] - old_v.x[c];
    const double ey = state.v.y[c] - old_v.y[c];
    diff += ex * ex + ey * ey;
  }
  report.dt_grad_h = dt > 0.0 ? std::sqrt(diff * grid_.cell_area()) / dt : 0.0;
  return report;
}

VectorField cell_gradient(const Grid& grid, std::span<const double> values) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  VectorField g;
  g.x.resize(grid.cell_count());
  g.y.resize(grid.cell_count());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      const std::size_t e = i < nx - 1 ? c + 1 : c;
      const std::size_t w = i > 0 ? c - 1 : c;
      const std::size_t n = j < ny - 1 ? c + nx : c;
      const std::size_t s = j > 0 ? c - nx : c;
      g.x[c] = (values[e] - values[w]) / (grid.dx() * ((e != c) + (w != c)));
      g.y[c] = (values[n] - values[s]) / (grid.dy() * ((n != c) + (s != c)));
    }
  }
  return g;
}

double total_mass(const Grid& grid, std::span<const double> omega) {
  double m = 0.0;
  for (double w : omega) m += w;
  return m * grid.cell_area();
}

double RunSummary::energy_bound() const { return std::sqrt(std::max(dissipation_integral, 0.0)); }

Trajectory run(const Grid& grid, const FluxModel& model, double nu, const BoundaryData& boundary,
               std::vector<double> omega0, const RunOptions& options, const SnapshotSink& sink) {
  if (!(options.t_final >= 0.0)) fail(ErrorKind::InvalidArgument, "t_final must be nonnegative");
  if (!(options.output_interval > 0.0)) fail(ErrorKind::InvalidArgument, "output interval must be positive");

  TransportSolver solver(grid, model, nu, boundary);
  Trajectory traj{grid, model, nu, boundary, {}, {}, {}};
  State state = solver.initial_state(std::move(omega0));

  RunSummary& summary = traj.summary;
  summary.initial_mass = total_mass(grid, state.omega.values);
  summary.final_mass = summary.initial_mass;
  summary.min_omega = *std::min_element(state.omega.values.begin(), state.omega.values.end());
  summary.max_omega = *std::max_element(state.omega.values.begin(), state.omega.values.end());
  summary.sup_abs_omega = max_abs(state.omega.values);
  summary.max_robin = robin_coefficient(model, state.v);

  auto emit = [&](const State& s) {
    Snapshot snap{s.t, s.omega.values, s.h.values, std::nullopt};
    if (options.store_gradients) snap.grad_omega = cell_gradient(grid, s.omega.values);
    if (sink) sink(snap, s);
    if (options.keep_snapshots) traj.snapshots.push_back(std::move(snap));
  };
  emit(state);

  const double t_final = options.t_final;
  const double eps = 1e-12 * std::max(1.0, t_final);
  long output_index = 1;
  auto next_output = [&] { return std::min(output_index * options.output_interval, t_final); };

  while (state.t < t_final - eps) {
    const double target = next_output();
    double dt = solver.stable_dt(state, options.cfl);
    bool hits_output = false;
    if (state.t + dt >= target - eps) {
      dt = target - state.t;
      hits_output = true;
    }
    StepReport report;
    try {
      report = solver.step(state, dt);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BlowUp && sink) {
        Snapshot snap{state.t, state.omega.values, state.h.values, std::nullopt};
        sink(snap, state);
      }
      throw;
    }
    if (hits_output) {
      state.t = target;
      state.omega.t = state.h.t = target;
      report.t = target;
    }

    ++summary.steps;
    summary.sup_abs_omega = std::max({summary.sup_abs_omega, std::abs(report.min_omega), std::abs(report.max_omega)});
    summary.min_omega = std::min(summary.min_omega, report.min_omega);
    summary.max_omega = std::max(summary.max_omega, report.max_omega);
    summary.dissipation_integral += report.dissipation * report.dt;
    summary.max_dt = std::max(summary.max_dt, report.dt);
    summary.max_robin = std::max(summary.max_robin, std::max(report.robin, robin_coefficient(model, state.v)));
    summary.max_relative_mass_residual =
        std::max(summary.max_relative_mass_residual, std::abs(report.mass_residual()) / report.mass_scale());
    summary.final_mass = report.mass_after;
    summary.max_dt_grad_h = std::max(summary.max_dt_grad_h, report.dt_grad_h);
    summary.max_h_second_difference = std::max(summary.max_h_second_difference, report.h_second_difference);
    traj.steps.push_back(report);

    if (hits_output) {
      emit(state);
      ++output_index;
    }
  }
  return traj;
}

}  // namespace vortexlayer

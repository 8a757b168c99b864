#include "vortexlayer/entropy_audit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "parallel.hpp"
#include "vortexlayer/error.hpp"

namespace vortexlayer {

double quintic_falloff(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double quintic_falloff_derivative(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (1.0 - u);
  return -30.0 * w * w;
}

namespace {

double bump(double s, double center, double radius) { return quintic_falloff(std::abs(s - center) / radius); }

double bump_derivative(double s, double center, double radius) {
  const double d = s - center;
  return sign_of(d) * quintic_falloff_derivative(std::abs(d) / radius) / radius;
}

// Antiderivative of g with G(0) = 0.
double g_primitive(const FluxModel& model, double s) {
  if (model.variant() == FluxModel::Variant::MeanField) return 0.5 * s * std::abs(s);
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0 / 6.0;
  return s * s * (0.5 - s / 3.0);
}

// Derivative of the entropy of a pair.
double entropy_slope(const EntropyPair& pair, double w) {
  const double d = w - pair.level();
  switch (pair.kind()) {
    case EntropyKind::Full: return sign_of(d);
    case EntropyKind::PlusPart: return d > 0.0 ? 1.0 : 0.0;
    case EntropyKind::MinusPart: return d < 0.0 ? -1.0 : 0.0;
  }
  return 0.0;
}

std::vector<double> frame_times(const AuditInput& input) {
  std::vector<double> t(input.frames.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = input.frames[k].t;
  return t;
}

// Weights c_k with sum_k c_k eta_k approximating int eta phi_t dt; a
// constant eta gets exactly eta (phi(T) - phi(0)).
std::vector<double> time_derivative_weights(const TestFunction& phi, std::span<const double> times) {
  const std::size_t n = times.size();
  std::vector<double> c(n, 0.0);
  if (n < 2) return c;
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = phi.time_factor(times[k]);
  c[0] = 0.5 * (p[1] - p[0]);
  c[n - 1] = 0.5 * (p[n - 1] - p[n - 2]);
  for (std::size_t k = 1; k + 1 < n; ++k) c[k] = 0.5 * (p[k + 1] - p[k - 1]);
  return c;
}

// Spatial factors of phi at cell centers and boundary face midpoints.
struct SpatialFactors {
  std::vector<double> value;  // X Y at cells
  std::vector<double> ddx;    // X' Y
  std::vector<double> ddy;    // X Y'
  std::vector<double> face;   // X Y at face midpoints
};

SpatialFactors spatial_factors(const Grid& grid, const TestFunction& phi) {
  SpatialFactors s;
  const std::size_t n = grid.cell_count();
  s.value.resize(n);
  s.ddx.resize(n);
  s.ddy.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const Vec2 p = grid.center(c);
    const double X = phi.x_factor(p.x);
    const double Y = phi.y_factor(p.y);
    s.value[c] = X * Y;
    s.ddx[c] = phi.x_factor_derivative(p.x) * Y;
    s.ddy[c] = X * phi.y_factor_derivative(p.y);
  }
  const auto faces = grid.boundary_faces();
  s.face.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    s.face[f] = phi.x_factor(faces[f].midpoint.x) * phi.y_factor(faces[f].midpoint.y);
  }
  return s;
}

void require_frames(const AuditInput& input) {
  if (input.frames.empty()) fail(ErrorKind::NoSnapshots, "no snapshots");
}

double positive_part(double s) { return s > 0.0 ? s : 0.0; }

}  // namespace

TestFunction::TestFunction(double t0, double x0, double y0, double rt, double rx, double ry)
    : t0_(t0), x0_(x0), y0_(y0), rt_(rt), rx_(rx), ry_(ry) {
  if (!(rt > 0.0 && rx > 0.0 && ry > 0.0)) fail(ErrorKind::InvalidArgument, "test function radii must be positive");
}

TestFunction TestFunction::time_cutoff(double t_end, double width) {
  if (!(width > 0.0)) fail(ErrorKind::InvalidArgument, "cutoff width must be positive");
  TestFunction phi;
  phi.t0_ = t_end - width;
  phi.rt_ = width;
  phi.uniform_ = true;
  phi.cutoff_ = true;
  return phi;
}

TestFunction TestFunction::zero() {
  TestFunction phi;
  phi.zero_ = true;
  phi.uniform_ = true;
  return phi;
}

double TestFunction::time_factor(double t) const {
  if (zero_) return 0.0;
  if (cutoff_) return t <= t0_ ? 1.0 : quintic_falloff((t - t0_) / rt_);
  return bump(t, t0_, rt_);
}

double TestFunction::time_factor_derivative(double t) const {
  if (zero_) return 0.0;
  if (cutoff_) return t <= t0_ ? 0.0 : quintic_falloff_derivative((t - t0_) / rt_) / rt_;
  return bump_derivative(t, t0_, rt_);
}

double TestFunction::x_factor(double x) const { return uniform_ ? 1.0 : bump(x, x0_, rx_); }
double TestFunction::x_factor_derivative(double x) const { return uniform_ ? 0.0 : bump_derivative(x, x0_, rx_); }
double TestFunction::y_factor(double y) const { return uniform_ ? 1.0 : bump(y, y0_, ry_); }
double TestFunction::y_factor_derivative(double y) const { return uniform_ ? 0.0 : bump_derivative(y, y0_, ry_); }

double TestFunction::value(double t, double x, double y) const { return time_factor(t) * x_factor(x) * y_factor(y); }
double TestFunction::dt(double t, double x, double y) const {
  return time_factor_derivative(t) * x_factor(x) * y_factor(y);
}
double TestFunction::dx(double t, double x, double y) const {
  return time_factor(t) * x_factor_derivative(x) * y_factor(y);
}
double TestFunction::dy(double t, double x, double y) const {
  return time_factor(t) * x_factor(x) * y_factor_derivative(y);
}

double TestFunction::support_start() const {
  if (zero_) return std::numeric_limits<double>::infinity();
  return cutoff_ ? -std::numeric_limits<double>::infinity() : t0_ - rt_;
}

double TestFunction::support_end() const { return zero_ ? -std::numeric_limits<double>::infinity() : t0_ + rt_; }

std::vector<TestFunction> make_test_function_family(double t_final, double lx, double ly) {
  if (!(t_final > 0.0)) fail(ErrorKind::InvalidArgument, "test function family needs a positive final time");
  const double centers[3] = {0.15, 0.5, 0.85};
  const double time_centers[3] = {0.0, 0.25, 0.5};
  const double radii[2] = {0.25, 0.5};
  std::vector<TestFunction> family;
  family.reserve(54);
  for (double r : radii) {
    for (double tc : time_centers) {
      for (double cy : centers) {
        for (double cx : centers) {
          family.emplace_back(tc * t_final, cx * lx, cy * ly, r * t_final, r * lx, r * ly);
        }
      }
    }
  }
  return family;
}

void validate_test_function(const TestFunction& phi, double t_final, const Grid& grid) {
  if (phi.is_zero()) return;
  const double slack = 1e-12 * std::max(1.0, std::abs(t_final));
  if (phi.support_end() > t_final + slack) {
    fail(ErrorKind::InvalidArgument, "test function does not vanish at the final time");
  }
  if (phi.support_end() <= 0.0) fail(ErrorKind::InvalidArgument, "test function support ends before t = 0");
  if (phi.spatially_uniform()) return;
  if (phi.x0() + phi.rx() <= 0.0 || phi.x0() - phi.rx() >= grid.lx() || phi.y0() + phi.ry() <= 0.0 ||
      phi.y0() - phi.ry() >= grid.ly()) {
    fail(ErrorKind::InvalidArgument, "test function support lies outside the domain");
  }
}

AuditInput AuditInput::from_snapshots(const Grid& grid, const FluxModel& model, double nu,
                                      const BoundaryData& boundary, std::span<const Snapshot> snapshots) {
  if (snapshots.empty()) fail(ErrorKind::NoSnapshots, "no snapshots");
  AuditInput input{grid, model, nu, {}, 0.0};
  input.frames.reserve(snapshots.size());
  for (const Snapshot& s : snapshots) {
    if (s.omega.size() != grid.cell_count() || s.h.size() != grid.cell_count()) {
      fail(ErrorKind::InvalidArgument, "snapshot size does not match the grid");
    }
    const BoundaryTrace trace = boundary.a_trace(grid, s.t);
    AuditFrame frame;
    frame.t = s.t;
    frame.omega = s.omega;
    frame.h = s.h;
    frame.v = velocity(grid, s.h, trace);
    const std::vector<double> dh_dn = normal_derivative(grid, s.h, trace);
    frame.b = nucleation_trace(boundary, grid, s.t, dh_dn);
    frame.boundary_vn.resize(dh_dn.size());
    for (std::size_t f = 0; f < dh_dn.size(); ++f) frame.boundary_vn[f] = -dh_dn[f];
    frame.robin = robin_coefficient(model, frame.v);
    frame.grad_omega = s.grad_omega;
    input.global_robin = std::max(input.global_robin, frame.robin);
    input.frames.push_back(std::move(frame));
  }
  return input;
}

AuditInput AuditInput::from_trajectory(const Trajectory& traj) {
  return from_snapshots(traj.grid, traj.model, traj.nu, traj.boundary, traj.snapshots);
}

double AuditInput::max_abs_omega() const {
  double m = 0.0;
  for (const AuditFrame& f : frames) {
    for (double w : f.omega) m = std::max(m, std::abs(w));
  }
  return m;
}

double entropy_balance(const AuditInput& input, const EntropyPair& pair, const TestFunction& phi,
                       BalanceOptions options) {
  if (phi.is_zero()) return 0.0;
  require_frames(input);
  const Grid& grid = input.grid;
  validate_test_function(phi, input.t_final(), grid);
  if (options.include_viscous) {
    for (const AuditFrame& f : input.frames) {
      if (!f.grad_omega) fail(ErrorKind::MissingData, "viscous balance needs stored gradient snapshots");
    }
  }

  const std::vector<double> times = frame_times(input);
  const std::vector<double> wt = trapezoid_weights(times);
  const std::vector<double> ct = time_derivative_weights(phi, times);
  const SpatialFactors sf = spatial_factors(grid, phi);
  const double gxi = input.model.g(pair.level());
  const double nu = input.nu;
  const std::size_t n = grid.cell_count();
  const auto faces = grid.boundary_faces();

  double interior = 0.0;
  double boundary = 0.0;
  for (std::size_t k = 0; k < input.frames.size(); ++k) {
    const AuditFrame& fr = input.frames[k];
    const double T = phi.time_factor(fr.t);
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double w = fr.omega[c];
      const double s = entropy_slope(pair, w);
      const double gx = T * sf.ddx[c];
      const double gy = T * sf.ddy[c];
      double term = pair.eta(w) * ct[k] * sf.value[c];
      double rate = pair.q(w) * (fr.v.x[c] * gx + fr.v.y[c] * gy) + s * gxi * (fr.h[c] - w) * T * sf.value[c];
      if (options.include_viscous) {
        rate -= nu * s * (fr.grad_omega->x[c] * gx + fr.grad_omega->y[c] * gy);
      }
      acc += term + wt[k] * rate;
    }
    interior += acc;

    const double M = options.robin == RobinWeight::Global ? input.global_robin : fr.robin;
    if (M != 0.0 && T != 0.0) {
      double edge = 0.0;
      for (std::size_t f = 0; f < faces.size(); ++f) edge += pair.eta(fr.b[f]) * sf.face[f] * faces[f].area;
      boundary += wt[k] * M * T * edge;
    }
  }

  const AuditFrame& first = input.frames.front();
  const double T0 = phi.time_factor(first.t);
  double initial = 0.0;
  for (std::size_t c = 0; c < n; ++c) initial += pair.eta(first.omega[c]) * sf.value[c];

  return (interior + T0 * initial) * grid.cell_area() + boundary;
}

double kruzkov_residual(const AuditInput& input, double xi, const TestFunction& phi) {
  return entropy_balance(input, entropy_pair(input.model, xi, EntropyKind::Full), phi, {RobinWeight::Global, false});
}

double viscous_entropy_balance(const AuditInput& input, double xi, const TestFunction& phi, EntropyPart part) {
  const EntropyKind kind = part == EntropyPart::Plus ? EntropyKind::PlusPart : EntropyKind::MinusPart;
  return entropy_balance(input, entropy_pair(input.model, xi, kind), phi, {RobinWeight::PerTime, true});
}

ToleranceModel fit_tolerance(double min_residual, double dx, double dt, double floor) {
  if (!(dx > 0.0)) fail(ErrorKind::InvalidArgument, "tolerance fit needs a positive dx");
  const double deficit = std::max(floor, -min_residual);
  return {deficit / dx, dt > 0.0 ? deficit / dt : 0.0};
}

void apply_tolerance(ResidualReport& report, const ToleranceModel& model) {
  report.model = model;
  report.tolerance = model(report.dx, report.dt);
  for (ResidualEntry& e : report.entries) e.pass = e.residual >= -report.tolerance;
}

KruzkovAuditor::KruzkovAuditor(const AuditInput& input) : input_(input) {
  require_frames(input);
  const std::size_t n = input.grid.cell_count();
  const std::size_t nf = input.grid.boundary_faces().size();
  const std::size_t frames = input.frames.size();
  if (frames * std::max(n, nf) >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorKind::InvalidArgument, "trajectory too large for the entropy auditor");
  }
  auto sort_samples = [](Sorted& out, std::size_t count, std::size_t per_frame, auto&& value_of, bool interior,
                         const AuditInput& in) {
    std::vector<double> raw(count);
    for (std::size_t i = 0; i < count; ++i) raw[i] = value_of(i);
    std::vector<std::uint32_t> order(count);
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return raw[a] < raw[b]; });
    out.values.resize(count);
    out.frame.resize(count);
    out.item.resize(count);
    if (interior) {
      out.excess.resize(count);
      out.vx.resize(count);
      out.vy.resize(count);
    }
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t s = order[i];
      out.values[i] = raw[s];
      out.frame[i] = static_cast<std::uint32_t>(s / per_frame);
      out.item[i] = static_cast<std::uint32_t>(s % per_frame);
      if (interior) {
        const AuditFrame& fr = in.frames[out.frame[i]];
        out.excess[i] = fr.h[out.item[i]] - raw[s];
        out.vx[i] = fr.v.x[out.item[i]];
        out.vy[i] = fr.v.y[out.item[i]];
      }
    }
  };
  sort_samples(interior_, frames * n, n, [&](std::size_t i) { return input.frames[i / n].omega[i % n]; }, true,
               input);
  sort_samples(initial_, n, n, [&](std::size_t i) { return input.frames.front().omega[i]; }, false, input);
  sort_samples(boundary_, frames * nf, nf, [&](std::size_t i) { return input.frames[i / nf].b[i % nf]; }, false,
               input);
}

namespace {

// S(X)(xi) = sum_{w > xi} X - sum_{w < xi} X for each level, in one pass
// over the sorted samples. Levels are visited in ascending order; a level is
// settled when the first sample above it arrives, at which point the running
// sum covers exactly the samples at or below it. Samples tied with the level
// are the trailing run of equal values.
template <std::size_t Q, class Quantities>
std::vector<std::array<double, Q>> signed_sums(std::span<const double> sorted_values, std::span<const double> levels,
                                               std::span<const std::size_t> level_order, Quantities&& quantities) {
  std::vector<std::array<double, Q>> at_or_below(levels.size());
  std::vector<std::array<double, Q>> below(levels.size());
  std::array<double, Q> cum{};
  std::array<double, Q> run{};
  double run_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t next = 0;
  auto settle = [&](double bound) {
    while (next < level_order.size() && levels[level_order[next]] < bound) {
      const std::size_t li = level_order[next++];
      at_or_below[li] = cum;
      below[li] = cum;
      if (run_value == levels[li]) {
        for (std::size_t j = 0; j < Q; ++j) below[li][j] -= run[j];
      }
    }
  };
  for (std::size_t i = 0; i < sorted_values.size(); ++i) {
    const double v = sorted_values[i];
    settle(v);
    if (v != run_value) {
      run_value = v;
      run.fill(0.0);
    }
    const auto q = quantities(i);
    for (std::size_t j = 0; j < Q; ++j) {
      cum[j] += q[j];
      run[j] += q[j];
    }
  }
  settle(std::numeric_limits<double>::infinity());
  std::vector<std::array<double, Q>> out(levels.size());
  for (std::size_t li = 0; li < levels.size(); ++li) {
    for (std::size_t j = 0; j < Q; ++j) out[li][j] = (cum[j] - at_or_below[li][j]) - below[li][j];
  }
  return out;
}

}  // namespace

std::vector<double> KruzkovAuditor::residuals(const TestFunction& phi, std::span<const double> levels) const {
  std::vector<double> out(levels.size(), 0.0);
  if (phi.is_zero()) return out;
  const AuditInput& in = input_;
  const Grid& grid = in.grid;
  validate_test_function(phi, in.t_final(), grid);

  const std::vector<double> times = frame_times(in);
  const std::vector<double> wt = trapezoid_weights(times);
  const std::vector<double> ct = time_derivative_weights(phi, times);
  std::vector<double> tf(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) tf[k] = phi.time_factor(times[k]);
  const SpatialFactors sf = spatial_factors(grid, phi);
  const auto faces = grid.boundary_faces();
  const double area = grid.cell_area();
  const FluxModel& model = in.model;

  std::vector<std::size_t> level_order(levels.size());
  std::iota(level_order.begin(), level_order.end(), std::size_t{0});
  std::stable_sort(level_order.begin(), level_order.end(),
                   [&](std::size_t a, std::size_t b) { return levels[a] < levels[b]; });

  // Interior: U = w A + g(w) B, A, B, D with
  // A = c_k XY, B = w_k T v.grad(XY), D = w_k T XY (h - w).
  const Sorted& is = interior_;
  const auto interior = signed_sums<4>(is.values, levels, level_order, [&](std::size_t i) {
    const std::uint32_t k = is.frame[i];
    const std::uint32_t c = is.item[i];
    const double w = is.values[i];
    const double a = ct[k] * sf.value[c];
    const double b = wt[k] * tf[k] * (is.vx[i] * sf.ddx[c] + is.vy[i] * sf.ddy[c]);
    const double d = wt[k] * tf[k] * sf.value[c] * is.excess[i];
    return std::array<double, 4>{w * a + model.g(w) * b, a, b, d};
  });
  const double t0 = tf.front();
  const auto initial = signed_sums<2>(initial_.values, levels, level_order, [&](std::size_t i) {
    const double e = t0 * sf.value[initial_.item[i]];
    return std::array<double, 2>{initial_.values[i] * e, e};
  });
  const double M = in.global_robin;
  const auto edge = signed_sums<2>(boundary_.values, levels, level_order, [&](std::size_t i) {
    const std::uint32_t k = boundary_.frame[i];
    const std::uint32_t f = boundary_.item[i];
    const double e = M * wt[k] * tf[k] * sf.face[f] * faces[f].area;
    return std::array<double, 2>{boundary_.values[i] * e, e};
  });

  for (std::size_t l = 0; l < levels.size(); ++l) {
    const double xi = levels[l];
    const double gxi = model.g(xi);
    const auto& I = interior[l];
    const double cells = I[0] - xi * I[1] - gxi * I[2] + gxi * I[3] + (initial[l][0] - xi * initial[l][1]);
    out[l] = cells * area + (edge[l][0] - xi * edge[l][1]);
  }
  return out;
}

double quadrature_dt(const AuditInput& input) {
  double dt = 0.0;
  for (std::size_t k = 1; k < input.frames.size(); ++k) dt = std::max(dt, input.frames[k].t - input.frames[k - 1].t);
  return dt;
}

ResidualReport audit_entropy(const AuditInput& input, std::span<const TestFunction> family,
                             std::span<const double> levels, const ToleranceModel& tolerance, std::size_t threads,
                             std::size_t min_frames) {
  require_frames(input);
  const double T = input.t_final();
  for (const TestFunction& phi : family) {
    if (phi.is_zero()) continue;
    validate_test_function(phi, T, input.grid);
    const double lo = std::max(0.0, phi.support_start());
    const double hi = std::min(T, phi.support_end());
    std::size_t inside = 0;
    for (const AuditFrame& f : input.frames) inside += (f.t >= lo && f.t <= hi) ? 1 : 0;
    if (inside < min_frames) {
      fail(ErrorKind::MissingData, "snapshots too sparse for the test-function family: " + std::to_string(inside) +
                                       " frames inside a time support, need " + std::to_string(min_frames));
    }
  }

  ResidualReport report;
  report.dx = std::max(input.grid.dx(), input.grid.dy());
  report.dt = quadrature_dt(input);
  report.model = tolerance;
  report.tolerance = tolerance(report.dx, report.dt);

  const KruzkovAuditor auditor(input);
  std::vector<std::vector<double>> values(family.size());
  detail::parallel_for(family.size(), threads,
                       [&](std::size_t i, std::size_t) { values[i] = auditor.residuals(family[i], levels); });

  report.entries.reserve(family.size() * levels.size());
  report.minimum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double r = values[i][l];
      if (!std::isfinite(r)) fail(ErrorKind::SolverDivergence, "non-finite entropy residual");
      report.entries.push_back({levels[l], i, r, r >= -report.tolerance});
      report.minimum = std::min(report.minimum, r);
    }
  }
  if (report.entries.empty()) report.minimum = 0.0;
  return report;
}

namespace {

struct MeasureTerms {
  double lhs = 0.0;
  double initial = 0.0;
  double boundary = 0.0;
};

MeasureTerms measure_terms(const AuditInput& input, double xi, double cutoff_width) {
  require_frames(input);
  const TestFunction phi = TestFunction::time_cutoff(input.t_final(), cutoff_width);
  MeasureTerms m;
  // phi is constant in space, so the viscous term vanishes identically.
  m.lhs = entropy_balance(input, entropy_pair(input.model, xi, EntropyKind::PlusPart), phi,
                          {RobinWeight::PerTime, false});
  for (double w : input.frames.front().omega) m.initial += positive_part(w - xi);
  m.initial *= input.grid.cell_area();
  const std::vector<double> wt = trapezoid_weights(frame_times(input));
  const auto faces = input.grid.boundary_faces();
  for (std::size_t k = 0; k < input.frames.size(); ++k) {
    const AuditFrame& fr = input.frames[k];
    double edge = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) edge += positive_part(fr.b[f] - xi) * faces[f].area;
    m.boundary += wt[k] * fr.robin * edge;
  }
  return m;
}

}  // namespace

MeasureBound measure_bound_check(const AuditInput& input, double xi, double constant, double tolerance,
                                 double cutoff_width) {
  const MeasureTerms m = measure_terms(input, xi, cutoff_width);
  MeasureBound out;
  out.lhs = m.lhs;
  out.initial_term = m.initial;
  out.boundary_term = m.boundary;
  out.rhs = m.initial + m.boundary + constant * input.model.g(xi);
  out.pass = out.lhs <= out.rhs + tolerance;
  return out;
}

double calibrate_measure_constant(const AuditInput& input, std::span<const double> levels, double cutoff_width) {
  double gmax = 0.0;
  for (double xi : levels) gmax = std::max(gmax, input.model.g(xi));
  if (gmax <= 0.0) return 0.0;
  double worst = 0.0;
  for (double xi : levels) {
    const double g = input.model.g(xi);
    if (g < 0.05 * gmax) continue;
    const MeasureTerms m = measure_terms(input, xi, cutoff_width);
    worst = std::max(worst, (m.lhs - m.initial - m.boundary) / g);
  }
  return 2.0 * worst;
}

BoundMonitors bound_monitors(const AuditInput& input) {
  require_frames(input);
  const Grid& grid = input.grid;
  const FluxModel& model = input.model;
  const std::size_t n = grid.cell_count();
  const auto faces = grid.boundary_faces();
  const double area = grid.cell_area();

  BoundMonitors out;
  out.sup_abs_omega = input.max_abs_omega();

  std::vector<double> energy(input.frames.size());
  std::vector<double> rate(input.frames.size());
  std::vector<double> gradient_sq(input.frames.size());
  for (std::size_t k = 0; k < input.frames.size(); ++k) {
    const AuditFrame& fr = input.frames[k];
    const VectorField grad = fr.grad_omega ? *fr.grad_omega : cell_gradient(grid, fr.omega);
    double e = 0.0;
    double g2 = 0.0;
    double source = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double w = fr.omega[c];
      e += 0.5 * w * w;
      g2 += grad.x[c] * grad.x[c] + grad.y[c] * grad.y[c];
      source += g_primitive(model, w) * (w - fr.h[c]);
    }
    double edge = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const double w = fr.omega[faces[f].owner];
      const double advective = (g_primitive(model, w) - w * model.g(w)) * fr.boundary_vn[f];
      const double robin = -w * fr.robin * (w - fr.b[f]);
      edge += (advective + robin) * faces[f].area;
    }
    energy[k] = e * area;
    gradient_sq[k] = g2 * area;
    rate[k] = -input.nu * g2 * area - source * area + edge;
  }

  const std::vector<double> wt = trapezoid_weights(frame_times(input));
  double integral = 0.0;
  for (std::size_t k = 0; k < wt.size(); ++k) integral += wt[k] * gradient_sq[k];
  out.energy = std::sqrt(input.nu * integral);

  for (std::size_t k = 0; k + 1 < input.frames.size(); ++k) {
    const double t0 = input.frames[k].t;
    const double t1 = input.frames[k + 1].t;
    out.energy_times.push_back(0.5 * (t0 + t1));
    out.energy_residuals.push_back((energy[k + 1] - energy[k]) - 0.5 * (t1 - t0) * (rate[k] + rate[k + 1]));
  }
  return out;
}

}  // namespace vortexlayer

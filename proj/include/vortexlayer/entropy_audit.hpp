#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortexlayer/boundary.hpp"
#include "vortexlayer/flux_models.hpp"
#include "vortexlayer/geometry.hpp"
#include "vortexlayer/kinetic.hpp"
#include "vortexlayer/transport.hpp"

namespace vortexlayer {

/// Smooth decreasing profile on [0,1]: 1 - (10u^3 - 15u^4 + 6u^5).
/// C^2 at both ends, value 1 at 0 and 0 at 1.
double quintic_falloff(double u);
double quintic_falloff_derivative(double u);

/// Tensor product of quintic bumps centered at (t0, x0, y0) with radii
/// (rt, rx, ry). A spatially uniform function has value 1 in space and only
/// its time profile varies.
class TestFunction {
 public:
  TestFunction(double t0, double x0, double y0, double rt, double rx, double ry);

  /// phi(t) = 1 for t <= t_end - width, falling smoothly to 0 at t_end,
  /// constant in space.
  static TestFunction time_cutoff(double t_end, double width);
  static TestFunction zero();

  double value(double t, double x, double y) const;
  double dt(double t, double x, double y) const;
  double dx(double t, double x, double y) const;
  double dy(double t, double x, double y) const;

  double time_factor(double t) const;
  double time_factor_derivative(double t) const;
  double x_factor(double x) const;
  double x_factor_derivative(double x) const;
  double y_factor(double y) const;
  double y_factor_derivative(double y) const;

  /// First and last time with nonzero value (start is -inf for a cutoff).
  double support_start() const;
  double support_end() const;
  bool is_zero() const { return zero_; }
  bool spatially_uniform() const { return uniform_; }

  double t0() const { return t0_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double rt() const { return rt_; }
  double rx() const { return rx_; }
  double ry() const { return ry_; }

 private:
  TestFunction() = default;

  double t0_ = 0.0, x0_ = 0.0, y0_ = 0.0;
  double rt_ = 1.0, rx_ = 1.0, ry_ = 1.0;
  bool uniform_ = false;
  bool cutoff_ = false;  // one-sided time profile
  bool zero_ = false;
};

/// 3x3x3 lattice of centers times two radii (54 functions). Time centers
/// {0, T/4, T/2}; space centers at 0.15, 0.5, 0.85 of each side; radii
/// (T/4, L/4) and (T/2, L/2).
std::vector<TestFunction> make_test_function_family(double t_final, double lx, double ly);

/// Throws Error(InvalidArgument) when phi does not vanish by t_final or its
/// support misses the domain.
void validate_test_function(const TestFunction& phi, double t_final, const Grid& grid);

/// Everything the audits need at one snapshot, derived from (omega, h).
struct AuditFrame {
  double t = 0.0;
  std::vector<double> omega;
  std::vector<double> h;
  VectorField v;
  std::vector<double> b;            ///< nucleation value per boundary face
  std::vector<double> boundary_vn;  ///< v.n per boundary face
  double robin = 0.0;     ///< M(v(t))
  std::optional<VectorField> grad_omega;
};

struct AuditInput {
  Grid grid;
  FluxModel model;
  double nu = 0.0;
  std::vector<AuditFrame> frames;
  double global_robin = 0.0;  ///< K ||v||_{L_inf} over the whole run

  static AuditInput from_snapshots(const Grid& grid, const FluxModel& model, double nu, const BoundaryData& boundary,
                                   std::span<const Snapshot> snapshots);
  static AuditInput from_trajectory(const Trajectory& traj);

  double t_final() const { return frames.empty() ? 0.0 : frames.back().t; }
  double max_abs_omega() const;
};

enum class RobinWeight { Global, PerTime };

struct BalanceOptions {
  RobinWeight robin = RobinWeight::Global;
  bool include_viscous = false;
};

/// Space-time quadrature of the weak entropy balance for an entropy pair:
///   int eta phi_t + q v.grad phi + s(omega) g(xi) (h - omega) phi
///   + int eta(omega_0) phi(0) + int_Gamma M eta(b) phi
///   [- nu int eta'(omega) grad omega . grad phi]
/// where s is eta' of the pair (sign, sign_+, or sign_+ - 1). Cell midpoint
/// rule in space, trapezoid in time; the phi_t term is summed by parts so a
/// time-constant eta integrates phi_t exactly.
double entropy_balance(const AuditInput& input, const EntropyPair& pair, const TestFunction& phi,
                       BalanceOptions options);

/// Weak Kruzkov entropy inequality residual for the full entropy |omega - xi|
/// (global Robin weight, no viscous term). Nonnegative for entropy solutions
/// up to discretization error.
double kruzkov_residual(const AuditInput& input, double xi, const TestFunction& phi);

enum class EntropyPart { Plus, Minus };

/// Viscous balance for |omega - xi|_+ or |omega - xi|_-, including the
/// -nu f grad omega . grad phi term; estimates the defect measure pairing.
/// Throws Error(MissingData) without stored gradients.
double viscous_entropy_balance(const AuditInput& input, double xi, const TestFunction& phi, EntropyPart part);

/// Tolerance model C1 dx + C2 dt.
struct ToleranceModel {
  double c1 = 0.0;
  double c2 = 0.0;
  double operator()(double dx, double dt) const { return c1 * dx + c2 * dt; }
};

/// Fits the tolerance on a baseline: each of C1 dx and C2 dt alone covers
/// the observed deficit max(0, -min_residual) (floored at `floor`).
ToleranceModel fit_tolerance(double min_residual, double dx, double dt, double floor = 1e-12);

struct ResidualEntry {
  double xi = 0.0;
  std::size_t phi_id = 0;
  double residual = 0.0;
  bool pass = true;
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double minimum = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  double tolerance = 0.0;
  ToleranceModel model;
  bool pass() const { return minimum >= -tolerance; }
};

/// Re-evaluates tolerance, pass flags and the model of an existing report.
void apply_tolerance(ResidualReport& report, const ToleranceModel& model);

/// Kruzkov residuals for every (level, test function) pair using sorted
/// prefix sums over all space-time samples; one pass per test function.
class KruzkovAuditor {
 public:
  explicit KruzkovAuditor(const AuditInput& input);
  std::vector<double> residuals(const TestFunction& phi, std::span<const double> levels) const;

 private:
  // Samples sorted by state value, with the per-sample data the residual
  // needs copied alongside so the hot loop reads memory in order.
  struct Sorted {
    std::vector<double> values;
    std::vector<std::uint32_t> frame;
    std::vector<std::uint32_t> item;  // cell or boundary face
    std::vector<double> excess;       // h - omega (interior only)
    std::vector<double> vx;
    std::vector<double> vy;
  };
  const AuditInput& input_;
  Sorted interior_;  // samples (frame, cell)
  Sorted initial_;   // cells of the first frame
  Sorted boundary_;  // samples (frame, face)
};

/// Largest gap between consecutive frame times (the time quadrature step).
double quadrature_dt(const AuditInput& input);

/// Runs the whole family against every level; the report's dt is
/// quadrature_dt(input). Throws Error(MissingData) when some test function
/// sees fewer than `min_frames` frames inside its time support.
ResidualReport audit_entropy(const AuditInput& input, std::span<const TestFunction> family,
                             std::span<const double> levels, const ToleranceModel& tolerance,
                             std::size_t threads = 1, std::size_t min_frames = 16);

struct MeasureBound {
  double lhs = 0.0;  ///< m(1) estimated through the plus-part balance
  double rhs = 0.0;  ///< initial + boundary terms + C g(xi)
  double initial_term = 0.0;
  double boundary_term = 0.0;
  bool pass = false;
};

/// `cutoff_width` is the width of the time ramp that turns phi = 1 off at T.
MeasureBound measure_bound_check(const AuditInput& input, double xi, double constant, double tolerance,
                                 double cutoff_width);

/// Twice the largest (lhs - initial - boundary) / g(xi) over levels with
/// g(xi) >= 5% of the largest g on the level set; 0 when none is positive.
double calibrate_measure_constant(const AuditInput& input, std::span<const double> levels, double cutoff_width);

struct BoundMonitors {
  double sup_abs_omega = 0.0;
  double energy = 0.0;  ///< sqrt(nu) ||grad omega||_{L2(space-time)}
  std::vector<double> energy_times;      ///< interval midpoints
  std::vector<double> energy_residuals;  ///< discrete L2-energy identity residual per interval
};

BoundMonitors bound_monitors(const AuditInput& input);

}  // namespace vortexlayer

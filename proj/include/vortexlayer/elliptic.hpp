#pragma once

#include <memory>
#include <span>
#include <vector>

#include "vortexlayer/geometry.hpp"

namespace vortexlayer {

/// Cell-centered values (omega or h) at one time level, row-major in the
/// owning Grid's cell order.
struct ScalarField {
  std::vector<double> values;
  double t = 0.0;
};

/// Cell-centered vector field (v = -grad h).
struct VectorField {
  std::vector<double> x;
  std::vector<double> y;
};

/// Per-boundary-face values in Grid::boundary_faces() order.
using BoundaryTrace = std::vector<double>;

enum class Preconditioner {
  None,      ///< plain conjugate gradients
  FastSine,  ///< exact inverse of the constant-coefficient operator via DST-II/III
};

struct EllipticOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 100000;
  Preconditioner preconditioner = Preconditioner::FastSine;
};

struct EllipticResult {
  ScalarField h;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solver for -Lap h + h = source with h = a on the boundary, discretized by
/// the 5-point stencil and ghost cells h_ghost = 2a - h_owner. The operator
/// is symmetric positive definite; the linear system is solved by
/// (preconditioned) conjugate gradients.
///
/// A solver owns its transform plans and work buffers and is meant to be
/// reused across time steps on one grid. Not safe for concurrent use; give
/// each thread its own instance.
class EllipticSolver {
 public:
  explicit EllipticSolver(const Grid& grid, EllipticOptions options = {});
  ~EllipticSolver();
  EllipticSolver(EllipticSolver&&) noexcept;
  EllipticSolver& operator=(EllipticSolver&&) noexcept;
  EllipticSolver(const EllipticSolver&) = delete;
  EllipticSolver& operator=(const EllipticSolver&) = delete;

  /// `initial_guess` may be empty, in which case the source itself is used.
  /// Throws Error(SolverDivergence) when the iteration cap is hit.
  EllipticResult solve(std::span<const double> source, std::span<const double> trace,
                       std::span<const double> initial_guess = {});

  const Grid& grid() const { return grid_; }

 private:
  struct FastSine;

  void apply_homogeneous(std::span<const double> x, std::span<double> out) const;
  void residual(std::span<const double> source, std::span<const double> trace, std::span<const double> h,
                std::span<double> out) const;
  void precondition(std::span<const double> r, std::span<double> z);

  Grid grid_;
  EllipticOptions options_;
  std::unique_ptr<FastSine> fast_sine_;
};

ScalarField solve_screened_poisson(const Grid& grid, std::span<const double> source, std::span<const double> trace,
                                   EllipticOptions options = {});

/// h_a: the screened-Poisson solve with zero source.
ScalarField solve_background(const Grid& grid, std::span<const double> trace, EllipticOptions options = {});

/// v = -grad h. Central differences inside; at boundary cells a one-sided
/// second-order difference through the face trace.
VectorField velocity(const Grid& grid, std::span<const double> h, std::span<const double> trace);

/// Outward normal derivative dh/dn at every boundary face, second order,
/// from the trace and the two nearest cells along the inward normal.
std::vector<double> normal_derivative(const Grid& grid, std::span<const double> h, std::span<const double> trace);

/// max over interior cells of |second differences of h| divided by
/// (max|source| + max|trace|). Discrete surrogate of a W^2 bound on h.
double second_difference_ratio(const Grid& grid, std::span<const double> h, std::span<const double> source,
                               std::span<const double> trace);

}  // namespace vortexlayer

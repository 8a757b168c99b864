#include "vortexlayer/elliptic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "vortexlayer/error.hpp"

namespace vortexlayer {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void check_sizes(const Grid& grid, std::span<const double> source, std::span<const double> trace) {
  if (source.size() != grid.cell_count()) {
    fail(ErrorKind::InvalidArgument, "elliptic source has wrong length");
  }
  if (trace.size() != grid.boundary_faces().size()) {
    fail(ErrorKind::InvalidArgument, "boundary trace has wrong length");
  }
  for (double s : source) {
    if (!std::isfinite(s)) fail(ErrorKind::InvalidArgument, "elliptic source is not finite");
  }
}

}  // namespace

struct EllipticSolver::FastSine {
  int nx;
  int ny;
  double* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> inverse_eigen;  // 1/(lambda * normalization)

  FastSine(const Grid& g) : nx(g.nx()), ny(g.ny()) {
    const std::size_t n = g.cell_count();
    {
      std::lock_guard lock(planner_mutex());
      buffer = static_cast<double*>(fftw_malloc(sizeof(double) * n));
      forward = fftw_plan_r2r_2d(ny, nx, buffer, buffer, FFTW_RODFT10, FFTW_RODFT10, FFTW_ESTIMATE);
      backward = fftw_plan_r2r_2d(ny, nx, buffer, buffer, FFTW_RODFT01, FFTW_RODFT01, FFTW_ESTIMATE);
    }
    const double cx = 1.0 / (g.dx() * g.dx());
    const double cy = 1.0 / (g.dy() * g.dy());
    const double norm = 4.0 * nx * ny;
    inverse_eigen.resize(n);
    for (int ky = 0; ky < ny; ++ky) {
      const double sy = std::sin(std::numbers::pi * (ky + 1) / (2.0 * ny));
      for (int kx = 0; kx < nx; ++kx) {
        const double sx = std::sin(std::numbers::pi * (kx + 1) / (2.0 * nx));
        const double lambda = 1.0 + 4.0 * cx * sx * sx + 4.0 * cy * sy * sy;
        inverse_eigen[static_cast<std::size_t>(ky) * nx + kx] = 1.0 / (lambda * norm);
      }
    }
  }

  ~FastSine() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (buffer) fftw_free(buffer);
  }

  FastSine(const FastSine&) = delete;
  FastSine& operator=(const FastSine&) = delete;

  void apply(std::span<const double> r, std::span<double> z) {
    std::copy(r.begin(), r.end(), buffer);
    fftw_execute(forward);
    for (std::size_t k = 0; k < inverse_eigen.size(); ++k) buffer[k] *= inverse_eigen[k];
    fftw_execute(backward);
    std::copy(buffer, buffer + z.size(), z.begin());
  }
};

EllipticSolver::EllipticSolver(const Grid& grid, EllipticOptions options) : grid_(grid), options_(options) {
  if (options_.preconditioner == Preconditioner::FastSine) fast_sine_ = std::make_unique<FastSine>(grid_);
}

EllipticSolver::~EllipticSolver() = default;
EllipticSolver::EllipticSolver(EllipticSolver&&) noexcept = default;
EllipticSolver& EllipticSolver::operator=(EllipticSolver&&) noexcept = default;

// Operator rows are written in difference form so that constant fields with
// matching constant traces give an exactly zero residual.
void EllipticSolver::apply_homogeneous(std::span<const double> x, std::span<double> out) const {
  const int nx = grid_.nx();
  const int ny = grid_.ny();
  const double cx = 1.0 / (grid_.dx() * grid_.dx());
  const double cy = 1.0 / (grid_.dy() * grid_.dy());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid_.index(i, j);
      const double h = x[c];
      double acc = h;
      acc += (i > 0) ? cx * (h - x[c - 1]) : 2.0 * cx * h;
      acc += (i < nx - 1) ? cx * (h - x[c + 1]) : 2.0 * cx * h;
      acc += (j > 0) ? cy * (h - x[c - nx]) : 2.0 * cy * h;
      acc += (j < ny - 1) ? cy * (h - x[c + nx]) : 2.0 * cy * h;
      out[c] = acc;
    }
  }
}

void EllipticSolver::residual(std::span<const double> source, std::span<const double> trace,
                              std::span<const double> x, std::span<double> out) const {
  const int nx = grid_.nx();
  const int ny = grid_.ny();
  const double cx = 1.0 / (grid_.dx() * grid_.dx());
  const double cy = 1.0 / (grid_.dy() * grid_.dy());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid_.index(i, j);
      const double h = x[c];
      double acc = h;
      acc += (i > 0) ? cx * (h - x[c - 1]) : 2.0 * cx * (h - trace[grid_.face_index(Side::Left, j)]);
      acc += (i < nx - 1) ? cx * (h - x[c + 1]) : 2.0 * cx * (h - trace[grid_.face_index(Side::Right, j)]);
      acc += (j > 0) ? cy * (h - x[c - nx]) : 2.0 * cy * (h - trace[grid_.face_index(Side::Bottom, i)]);
      acc += (j < ny - 1) ? cy * (h - x[c + nx]) : 2.0 * cy * (h - trace[grid_.face_index(Side::Top, i)]);
      out[c] = source[c] - acc;
    }
  }
}

void EllipticSolver::precondition(std::span<const double> r, std::span<double> z) {
  if (fast_sine_) {
    fast_sine_->apply(r, z);
  } else {
    std::copy(r.begin(), r.end(), z.begin());
  }
}

EllipticResult EllipticSolver::solve(std::span<const double> source, std::span<const double> trace,
                                     std::span<const double> initial_guess) {
  check_sizes(grid_, source, trace);
  const std::size_t n = grid_.cell_count();

  EllipticResult result;
  std::vector<double>& h = result.h.values;
  if (initial_guess.empty()) {
    h.assign(source.begin(), source.end());
  } else {
    if (initial_guess.size() != n) fail(ErrorKind::InvalidArgument, "initial guess has wrong length");
    h.assign(initial_guess.begin(), initial_guess.end());
  }

  // Norm of the full right-hand side, boundary contributions included.
  std::vector<double> zero(n, 0.0);
  std::vector<double> r(n);
  residual(source, trace, zero, r);
  const double rhs_norm = std::sqrt(dot(r, r));

  residual(source, trace, h, r);
  double r_norm = std::sqrt(dot(r, r));
  const double target = options_.relative_tolerance * rhs_norm;
  if (r_norm <= target || r_norm == 0.0) {
    result.relative_residual = rhs_norm > 0.0 ? r_norm / rhs_norm : 0.0;
    return result;
  }

  std::vector<double> z(n), p(n), ap(n);
  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (it < options_.max_iterations) {
    ++it;
    apply_homogeneous(p, ap);
    const double alpha = rz / dot(p, ap);
    for (std::size_t k = 0; k < n; ++k) {
      h[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    r_norm = std::sqrt(dot(r, r));
    if (r_norm <= target) break;
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  result.iterations = it;
  result.relative_residual = r_norm / rhs_norm;
  if (r_norm > target) {
    std::ostringstream msg;
    msg << "screened Poisson solve did not converge in " << it << " iterations (relative residual "
        << result.relative_residual << ")";
    fail(ErrorKind::SolverDivergence, msg.str());
  }
  return result;
}

ScalarField solve_screened_poisson(const Grid& grid, std::span<const double> source, std::span<const double> trace,
                                   EllipticOptions options) {
  EllipticSolver solver(grid, options);
  return solver.solve(source, trace).h;
}

ScalarField solve_background(const Grid& grid, std::span<const double> trace, EllipticOptions options) {
  std::vector<double> zero(grid.cell_count(), 0.0);
  double mean = 0.0;
  double length = 0.0;
  const auto faces = grid.boundary_faces();
  for (std::size_t f = 0; f < faces.size() && f < trace.size(); ++f) {
    mean += trace[f] * faces[f].area;
    length += faces[f].area;
  }
  std::vector<double> guess(grid.cell_count(), length > 0.0 ? mean / length : 0.0);
  EllipticSolver solver(grid, options);
  return solver.solve(zero, trace, guess).h;
}

VectorField velocity(const Grid& grid, std::span<const double> h, std::span<const double> trace) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double dx = grid.dx();
  const double dy = grid.dy();
  VectorField v;
  v.x.resize(grid.cell_count());
  v.y.resize(grid.cell_count());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      double hx;
      if (i == 0) {
        const double a = trace[grid.face_index(Side::Left, j)];
        hx = ((h[c] - a) + (h[c + 1] - a) / 3.0) / dx;
      } else if (i == nx - 1) {
        const double a = trace[grid.face_index(Side::Right, j)];
        hx = ((a - h[c]) + (a - h[c - 1]) / 3.0) / dx;
      } else {
        hx = (h[c + 1] - h[c - 1]) / (2.0 * dx);
      }
      double hy;
      if (j == 0) {
        const double a = trace[grid.face_index(Side::Bottom, i)];
        hy = ((h[c] - a) + (h[c + nx] - a) / 3.0) / dy;
      } else if (j == ny - 1) {
        const double a = trace[grid.face_index(Side::Top, i)];
        hy = ((a - h[c]) + (a - h[c - nx]) / 3.0) / dy;
      } else {
        hy = (h[c + nx] - h[c - nx]) / (2.0 * dy);
      }
      v.x[c] = -hx;
      v.y[c] = -hy;
    }
  }
  return v;
}

std::vector<double> normal_derivative(const Grid& grid, std::span<const double> h, std::span<const double> trace) {
  const auto faces = grid.boundary_faces();
  std::vector<double> dn(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const BoundaryFace& face = faces[f];
    const double h0 = h[face.owner];
    const double h1 = h[grid.inward_cell(face, 1)];
    // 8/3 a - 3 h0 + h1/3, written so that a constant field gives exactly 0.
    dn[f] = (3.0 * (trace[f] - h0) - (trace[f] - h1) / 3.0) / grid.normal_spacing(face);
  }
  return dn;
}

double second_difference_ratio(const Grid& grid, std::span<const double> h, std::span<const double> source,
                               std::span<const double> trace) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double cx = 1.0 / (grid.dx() * grid.dx());
  const double cy = 1.0 / (grid.dy() * grid.dy());
  double worst = 0.0;
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) {
      const std::size_t c = grid.index(i, j);
      worst = std::max(worst, std::abs(h[c + 1] - 2.0 * h[c] + h[c - 1]) * cx);
      worst = std::max(worst, std::abs(h[c + nx] - 2.0 * h[c] + h[c - nx]) * cy);
    }
  }
  double scale = 0.0;
  for (double s : source) scale = std::max(scale, std::abs(s));
  double trace_max = 0.0;
  for (double a : trace) trace_max = std::max(trace_max, std::abs(a));
  scale += trace_max;
  return scale > 0.0 ? worst / scale : 0.0;
}

}  // namespace vortexlayer

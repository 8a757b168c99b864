#include "vortexlayer/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vortexlayer/error.hpp"

namespace vortexlayer {

namespace {

std::vector<double> level_values(const KineticGrid& levels) {
  std::vector<double> xs(static_cast<std::size_t>(levels.n_xi));
  for (int k = 0; k < levels.n_xi; ++k) xs[k] = levels.level(k);
  return xs;
}

// Number of levels strictly below omega, i.e. where chi(omega, xi) = 1.
std::size_t levels_below(const std::vector<double>& xs, double omega) {
  return static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), omega) - xs.begin());
}

double overlap(double lo, double hi, double a, double b) { return std::max(0.0, std::min(hi, b) - std::max(lo, a)); }

// Column helpers work on f(., cell) laid out contiguously over levels.
double reconstruct_column(const KineticGrid& levels, std::span<const double> f) {
  const double inf = std::numeric_limits<double>::infinity();
  double positive = 0.0;
  double negative = 0.0;
  for (int k = 0; k < levels.n_xi; ++k) {
    const double lo = levels.lower_edge(k);
    const double hi = lo + levels.spacing();
    positive += f[k] * overlap(lo, hi, 0.0, inf);
    negative += (1.0 - f[k]) * overlap(lo, hi, -inf, 0.0);
  }
  return positive - negative;
}

// tail[k] = int_{xi_k}^inf f ds with the midpoint rule (half of the own interval).
void tail_integrals(const KineticGrid& levels, std::span<const double> f, std::vector<double>& tail) {
  const double dxi = levels.spacing();
  tail.resize(static_cast<std::size_t>(levels.n_xi));
  double above = 0.0;
  for (int k = levels.n_xi - 1; k >= 0; --k) {
    tail[k] = above + 0.5 * dxi * f[k];
    above += dxi * f[k];
  }
}

std::vector<double> column(const KineticSlice& slice, std::size_t cell) {
  std::vector<double> col(static_cast<std::size_t>(slice.levels.n_xi));
  for (int k = 0; k < slice.levels.n_xi; ++k) col[k] = slice.at(k, cell);
  return col;
}

double rho_violation_column(const KineticGrid& levels, std::span<const double> f, double omega,
                            std::vector<double>& tail) {
  tail_integrals(levels, f, tail);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < levels.n_xi; ++k) {
    const double rho_k = levels.level(k) * f[k] + tail[k];
    const double defect = f[k] * (1.0 - f[k]);
    worst = std::max(worst, std::abs(rho_k - omega * f[k]) - 2.0 * levels.radius * defect - levels.spacing());
  }
  return worst;
}

}  // namespace

KineticGrid make_kinetic_grid(double radius, int n_xi) {
  if (n_xi < 8) fail(ErrorKind::InvalidArgument, "kinetic grid needs at least 8 levels");
  if (!(radius >= 0.0) || !std::isfinite(radius)) fail(ErrorKind::InvalidArgument, "kinetic radius must be finite and >= 0");
  return KineticGrid{-radius - 1.0, radius + 1.0, n_xi, radius};
}

KineticSlice make_slice(const KineticGrid& levels, std::span<const double> omega) {
  KineticSlice slice{levels, omega.size(), std::vector<double>(static_cast<std::size_t>(levels.n_xi) * omega.size(), 0.0)};
  const std::vector<double> xs = level_values(levels);
  for (std::size_t c = 0; c < omega.size(); ++c) {
    const std::size_t m = levels_below(xs, omega[c]);
    for (std::size_t k = 0; k < m; ++k) slice.f[k * omega.size() + c] = 1.0;
  }
  return slice;
}

double reconstruct_omega(const KineticSlice& slice, std::size_t cell) {
  return reconstruct_column(slice.levels, column(slice, cell));
}

double rho(const KineticSlice& slice, int k, std::size_t cell) {
  std::vector<double> tail;
  const std::vector<double> col = column(slice, cell);
  tail_integrals(slice.levels, col, tail);
  return slice.levels.level(k) * col[k] + tail[k];
}

std::vector<double> defect_F(const KineticSlice& slice) {
  std::vector<double> out(slice.f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = slice.f[i] * (1.0 - slice.f[i]);
  return out;
}

double rho_bound_check(const KineticSlice& slice, std::span<const double> omega) {
  if (omega.size() != slice.cells) fail(ErrorKind::InvalidArgument, "omega does not match the kinetic slice");
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> tail;
  for (std::size_t c = 0; c < slice.cells; ++c) {
    worst = std::max(worst, rho_violation_column(slice.levels, column(slice, c), omega[c], tail));
  }
  return worst;
}

std::vector<double> trapezoid_weights(std::span<const double> times) {
  std::vector<double> w(times.size(), 0.0);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double half = 0.5 * (times[k + 1] - times[k]);
    w[k] += half;
    w[k + 1] += half;
  }
  return w;
}

KineticSlice trace_time_average(std::span<const Snapshot> snapshots, const KineticGrid& levels, double window,
                                std::size_t min_snapshots) {
  if (snapshots.empty()) fail(ErrorKind::NoSnapshots, "no snapshots");
  const double t0 = snapshots.front().t;
  std::vector<double> times;
  for (const Snapshot& s : snapshots) {
    if (s.t - t0 <= window * (1.0 + 1e-12)) times.push_back(s.t);
  }
  if (times.size() < min_snapshots) {
    fail(ErrorKind::MissingData, "time window " + std::to_string(window) + " holds " + std::to_string(times.size()) +
                                     " snapshots, need at least " + std::to_string(min_snapshots));
  }
  std::vector<double> weights = trapezoid_weights(times);
  if (times.back() - times.front() <= 0.0) std::fill(weights.begin(), weights.end(), 1.0);
  // Summed in the same order as the per-cell totals below, so a cell whose
  // level set never changes averages to exactly 0 or 1.
  double total = 0.0;
  for (double w : weights) total += w;

  const std::size_t cells = snapshots.front().omega.size();
  const std::size_t nxi = static_cast<std::size_t>(levels.n_xi);
  const std::vector<double> xs = level_values(levels);
  // Difference array per cell over levels, then a prefix sum.
  std::vector<double> diff((nxi + 1) * cells, 0.0);
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (std::size_t c = 0; c < cells; ++c) {
      const std::size_t m = levels_below(xs, snapshots[s].omega[c]);
      diff[c * (nxi + 1)] += weights[s];
      diff[c * (nxi + 1) + m] -= weights[s];
    }
  }
  KineticSlice avg{levels, cells, std::vector<double>(nxi * cells, 0.0)};
  for (std::size_t c = 0; c < cells; ++c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nxi; ++k) {
      acc += diff[c * (nxi + 1) + k];
      avg.f[k * cells + c] = std::clamp(acc / total, 0.0, 1.0);
    }
  }
  return avg;
}

BoundaryKineticTrace trace_boundary_average(const Grid& grid, std::span<const Snapshot> snapshots,
                                            const KineticGrid& levels, double depth) {
  const auto faces = grid.boundary_faces();
  const std::size_t nxi = static_cast<std::size_t>(levels.n_xi);
  BoundaryKineticTrace out{levels, snapshots.size(), faces.size(), 0, {}};
  out.f.assign(snapshots.size() * faces.size() * nxi, 0.0);
  const std::vector<double> xs = level_values(levels);

  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    const BoundaryFace& face = faces[fi];
    const double spacing = grid.normal_spacing(face);
    const double half_width = 0.5 * grid.cells_along_normal(face) * spacing;
    if (depth < 2.0 * spacing * (1.0 - 1e-12)) {
      fail(ErrorKind::InvalidArgument, "boundary averaging depth must cover at least two cells");
    }
    if (depth > half_width * (1.0 + 1e-12)) {
      fail(ErrorKind::InvalidArgument, "boundary averaging depth exceeds the domain half-width");
    }
    const int cells = std::max(2, static_cast<int>(std::lround(depth / spacing)));
    out.depth_cells = cells;
    std::vector<double> diff(nxi + 1);
    for (std::size_t s = 0; s < snapshots.size(); ++s) {
      std::fill(diff.begin(), diff.end(), 0.0);
      for (int d = 0; d < cells; ++d) {
        const std::size_t m = levels_below(xs, snapshots[s].omega[grid.inward_cell(face, d)]);
        diff[0] += 1.0;
        diff[m] -= 1.0;
      }
      double acc = 0.0;
      double* dst = &out.f[(s * faces.size() + fi) * nxi];
      for (std::size_t k = 0; k < nxi; ++k) {
        acc += diff[k];
        dst[k] = acc / cells;
      }
    }
  }
  return out;
}

TraceDefectValues trace_defect_functionals(const Grid& grid, const FluxModel& model, const KineticSlice& f0,
                                const BoundaryKineticTrace& f_gamma,
                                std::span<const std::vector<double>> boundary_vn, std::span<const double> times) {
  TraceDefectValues out;
  const double dxi0 = f0.levels.spacing();
  for (double f : f0.f) out.interior += f * (1.0 - f);
  out.interior *= dxi0 * grid.cell_area();

  if (boundary_vn.size() != f_gamma.snapshots || times.size() != f_gamma.snapshots) {
    fail(ErrorKind::InvalidArgument, "boundary velocity history does not match the boundary trace");
  }
  const std::vector<double> weights = trapezoid_weights(times);
  const auto faces = grid.boundary_faces();
  const KineticGrid& lv = f_gamma.levels;
  std::vector<double> gp(static_cast<std::size_t>(lv.n_xi));
  for (int k = 0; k < lv.n_xi; ++k) gp[k] = model.g_prime(lv.level(k));
  double total = 0.0;
  for (std::size_t s = 0; s < f_gamma.snapshots; ++s) {
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      const double vn = boundary_vn[s][fi];
      double acc = 0.0;
      for (int k = 0; k < lv.n_xi; ++k) {
        const double weight = std::max(-gp[k] * vn, 0.0);
        if (weight == 0.0) continue;
        const double f = f_gamma.at(s, fi, k);
        acc += weight * f * (1.0 - f);
      }
      total += weights[s] * faces[fi].area * acc;
    }
  }
  out.boundary = total * lv.spacing();
  return out;
}

KineticSnapshotAudit audit_kinetic_snapshots(std::span<const Snapshot> snapshots, const KineticGrid& levels) {
  KineticSnapshotAudit audit;
  const std::vector<double> xs = level_values(levels);
  const std::size_t nxi = xs.size();
  std::vector<double> col(nxi);
  std::vector<double> tail;
  double worst_rho = -std::numeric_limits<double>::infinity();
  for (const Snapshot& snap : snapshots) {
    for (double w : snap.omega) {
      for (std::size_t k = 0; k < nxi; ++k) col[k] = chi(w, xs[k]);
      for (std::size_t k = 0; k + 1 < nxi; ++k) {
        if (col[k + 1] > col[k]) audit.monotone = false;
      }
      for (std::size_t k = 0; k < nxi; ++k) {
        if (xs[k] > levels.radius && col[k] != 0.0) audit.support = false;
        if (xs[k] < -levels.radius && col[k] != 1.0) audit.support = false;
      }
      audit.max_reconstruction_error =
          std::max(audit.max_reconstruction_error, std::abs(reconstruct_column(levels, col) - w));
      worst_rho = std::max(worst_rho, rho_violation_column(levels, col, w, tail));
    }
  }
  audit.max_rho_violation = worst_rho;
  return audit;
}

}  // namespace vortexlayer

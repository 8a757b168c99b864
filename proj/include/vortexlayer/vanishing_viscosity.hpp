#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortexlayer/boundary.hpp"
#include "vortexlayer/entropy_audit.hpp"
#include "vortexlayer/flux_models.hpp"
#include "vortexlayer/geometry.hpp"
#include "vortexlayer/kinetic.hpp"
#include "vortexlayer/transport.hpp"

namespace vortexlayer {

/// Everything about a run except its viscosity and resolution.
struct RunSpec {
  FluxModel model;
  double lx = 1.0;
  double ly = 1.0;
  BoundaryData boundary;
  std::function<std::vector<double>(const Grid&)> initial;
  RunOptions options;
};

/// How the grid follows the viscosity.
struct GridRule {
  enum class Kind { Resolved, Fixed };
  Kind kind = Kind::Resolved;
  double ratio = 4.0;  ///< Resolved: dx = min(dx_max, nu / ratio)
  double dx_max = 0.0;  ///< 0 means no cap
  int fixed_nx = 64;    ///< Fixed: cells along x; ny follows the aspect ratio
  std::string describe() const;
};

/// "nu/<ratio>" or "fixed:<nx>" (also plain "fixed", keeping the default nx).
GridRule parse_grid_rule(std::string_view text);

/// nu_0 * 2^-k, k = 0..count-1.
std::vector<double> geometric_viscosities(double nu0 = 0.1, int count = 6);

struct SweepConfig {
  std::string scenario = "custom";
  RunSpec base;
  std::vector<double> viscosities = geometric_viscosities();
  GridRule grid_rule;
  int max_cells_per_side = 4096;
  std::vector<int> norms = {1, 2, 4};
  bool entropy_audit = false;
  bool kinetic_audit = false;
  int layer_depths = 16;
  int xi_levels = 128;
  std::size_t threads = 0;  ///< 0: hardware concurrency, capped by VORTEXLAYER_THREADS
};

/// Throws Error(Validation) for an empty, nonpositive or increasing viscosity
/// list, unknown norm exponents, or grids over the cap.
void validate_sweep(const SweepConfig& config);

/// Cell counts (nx, ny) per viscosity; every run's counts are multiples of
/// the first (coarsest) run's so that fields restrict exactly.
std::vector<std::pair<int, int>> sweep_resolutions(const SweepConfig& config);

/// Cell-average restriction of a field on `fine` to `coarse`. Throws
/// Error(InvalidArgument) unless fine is an integer refinement of coarse on
/// the same rectangle.
std::vector<double> restrict_to_common_grid(const Grid& fine, std::span<const double> values, const Grid& coarse);

struct LayerRow {
  std::string group;  ///< side name or "all"
  int depth_index = 0;
  double depth = 0.0;  ///< depth_index * cell width along the normal
  double depth_over_nu = 0.0;
  double omega = 0.0;
};

/// omega along inward normals at depths j * dx, j = 0..depth_count, averaged
/// over the faces of each side and over all faces. Throws
/// Error(InvalidArgument) when the deepest sample passes the domain's
/// half-width.
std::vector<LayerRow> layer_profile(const Grid& grid, std::span<const double> omega, double nu, int depth_count);

struct SweepRun {
  double nu = 0.0;
  int nx = 0;
  int ny = 0;
  bool ok = false;
  std::string error;
  RunSummary summary;
  std::vector<double> times;                ///< output times
  std::vector<double> masses;               ///< total mass at each output time
  std::vector<std::vector<double>> coarse;  ///< omega restricted to the coarsest grid, per output time
  std::vector<LayerRow> layers;             ///< at the final time
  std::optional<ResidualReport> entropy;
  std::optional<KineticSnapshotAudit> kinetic;
  double kinetic_spacing = 0.0;  ///< level spacing of the kinetic audit
  double audit_seconds = 0.0;    ///< wall time of the entropy audit
};

struct SweepReport {
  std::string scenario;
  std::vector<SweepRun> runs;
  std::vector<int> norms;
  /// distance[p][i][j]: max over common output times of the L_p distance on
  /// the coarsest grid; NaN when either run failed.
  std::vector<std::vector<std::vector<double>>> distance;
  std::vector<double> common_times;
  std::vector<bool> cauchy;  ///< per norm
  std::optional<ToleranceModel> entropy_tolerance;

  double get(std::size_t norm_index, std::size_t i, std::size_t j) const { return distance[norm_index][i][j]; }
  bool all_ok() const;
  bool cauchy_all() const;
};

/// True when the last min(3, n-1) consecutive distances are nonincreasing.
bool cauchy_verdict(std::span<const double> consecutive);

SweepReport run_sweep(const SweepConfig& config);

}  // namespace vortexlayer

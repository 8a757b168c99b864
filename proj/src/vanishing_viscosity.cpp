#include "vortexlayer/vanishing_viscosity.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "vortexlayer/error.hpp"

namespace vortexlayer {

std::string GridRule::describe() const {
  std::ostringstream out;
  if (kind == Kind::Fixed) {
    out << "fixed:" << fixed_nx;
  } else {
    out << "nu/" << ratio;
  }
  return out.str();
}

GridRule parse_grid_rule(std::string_view text) {
  GridRule rule;
  auto number = [&](std::string_view digits, double& out) {
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
    return ec == std::errc() && ptr == digits.data() + digits.size();
  };
  if (text.starts_with("nu/")) {
    double ratio = 0.0;
    if (!number(text.substr(3), ratio) || !(ratio > 0.0)) {
      fail(ErrorKind::Validation, "grid rule 'nu/<ratio>' needs a positive ratio, got '" + std::string(text) + "'");
    }
    rule.kind = GridRule::Kind::Resolved;
    rule.ratio = ratio;
    return rule;
  }
  if (text == "fixed" || text.starts_with("fixed:")) {
    rule.kind = GridRule::Kind::Fixed;
    if (text.size() > 5) {
      double nx = 0.0;
      if (!number(text.substr(6), nx) || nx < 2.0 || nx != std::floor(nx)) {
        fail(ErrorKind::Validation, "grid rule 'fixed:<nx>' needs an integer nx >= 2, got '" + std::string(text) + "'");
      }
      rule.fixed_nx = static_cast<int>(nx);
    }
    return rule;
  }
  fail(ErrorKind::Validation, "unknown grid rule '" + std::string(text) + "' (expected nu/<ratio> or fixed:<nx>)");
}

std::vector<double> geometric_viscosities(double nu0, int count) {
  std::vector<double> nus;
  for (int k = 0; k < count; ++k) nus.push_back(std::ldexp(nu0, -k));
  return nus;
}

namespace {

int cells_for(double length, double dx) {
  return std::max(2, static_cast<int>(std::ceil(length / dx - 1e-9)));
}

std::pair<int, int> raw_resolution(const SweepConfig& config, double nu) {
  const RunSpec& base = config.base;
  if (config.grid_rule.kind == GridRule::Kind::Fixed) {
    const int nx = config.grid_rule.fixed_nx;
    return {nx, std::max(2, static_cast<int>(std::lround(nx * base.ly / base.lx)))};
  }
  double dx = nu / config.grid_rule.ratio;
  if (config.grid_rule.dx_max > 0.0) dx = std::min(dx, config.grid_rule.dx_max);
  return {cells_for(base.lx, dx), cells_for(base.ly, dx)};
}

int round_up_to_multiple(int value, int base) { return ((value + base - 1) / base) * base; }

bool same_time(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(1.0, scale); }

}  // namespace

void validate_sweep(const SweepConfig& config) {
  if (config.viscosities.empty()) fail(ErrorKind::Validation, "sweep needs at least one viscosity");
  for (std::size_t k = 0; k < config.viscosities.size(); ++k) {
    const double nu = config.viscosities[k];
    if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorKind::Validation, "sweep viscosities must be positive");
    if (k > 0 && nu > config.viscosities[k - 1]) {
      fail(ErrorKind::Validation, "sweep viscosities must be listed in nonincreasing order");
    }
  }
  if (config.norms.empty()) fail(ErrorKind::Validation, "sweep needs at least one norm exponent");
  for (int p : config.norms) {
    if (p < 1) fail(ErrorKind::Validation, "norm exponents must be integers >= 1");
  }
  if (!config.base.initial) fail(ErrorKind::Validation, "sweep needs an initial condition");
  if (!(config.base.lx > 0.0 && config.base.ly > 0.0)) fail(ErrorKind::Validation, "domain lengths must be positive");
  if (config.layer_depths < 0) fail(ErrorKind::Validation, "layer depth count must be nonnegative");
  for (const auto& [nx, ny] : sweep_resolutions(config)) {
    if (nx > config.max_cells_per_side || ny > config.max_cells_per_side) {
      fail(ErrorKind::Validation, "grid rule " + config.grid_rule.describe() + " asks for " + std::to_string(nx) + "x" +
                                      std::to_string(ny) + " cells, over the cap of " +
                                      std::to_string(config.max_cells_per_side) + " per side");
    }
  }
}

std::vector<std::pair<int, int>> sweep_resolutions(const SweepConfig& config) {
  std::vector<std::pair<int, int>> out;
  if (config.viscosities.empty()) return out;
  const auto [nx0, ny0] = raw_resolution(config, config.viscosities.front());
  for (double nu : config.viscosities) {
    const auto [nx, ny] = raw_resolution(config, nu);
    out.emplace_back(round_up_to_multiple(nx, nx0), round_up_to_multiple(ny, ny0));
  }
  return out;
}

std::vector<double> restrict_to_common_grid(const Grid& fine, std::span<const double> values, const Grid& coarse) {
  if (values.size() != fine.cell_count()) fail(ErrorKind::InvalidArgument, "field does not match the fine grid");
  const bool same_box = std::abs(fine.lx() - coarse.lx()) <= 1e-12 * coarse.lx() &&
                        std::abs(fine.ly() - coarse.ly()) <= 1e-12 * coarse.ly();
  if (!same_box || fine.nx() % coarse.nx() != 0 || fine.ny() % coarse.ny() != 0) {
    fail(ErrorKind::InvalidArgument, "grids are not nested: " + std::to_string(fine.nx()) + "x" +
                                         std::to_string(fine.ny()) + " does not refine " +
                                         std::to_string(coarse.nx()) + "x" + std::to_string(coarse.ny()));
  }
  const int rx = fine.nx() / coarse.nx();
  const int ry = fine.ny() / coarse.ny();
  std::vector<double> out(coarse.cell_count(), 0.0);
  for (int j = 0; j < fine.ny(); ++j) {
    for (int i = 0; i < fine.nx(); ++i) out[coarse.index(i / rx, j / ry)] += values[fine.index(i, j)];
  }
  const double inv = 1.0 / (rx * ry);
  for (double& v : out) v *= inv;
  return out;
}

std::vector<LayerRow> layer_profile(const Grid& grid, std::span<const double> omega, double nu, int depth_count) {
  if (omega.size() != grid.cell_count()) fail(ErrorKind::InvalidArgument, "field does not match the grid");
  if (depth_count < 0) fail(ErrorKind::InvalidArgument, "depth count must be nonnegative");
  const auto faces = grid.boundary_faces();
  for (const BoundaryFace& face : faces) {
    const double spacing = grid.normal_spacing(face);
    const double half_width = 0.5 * grid.cells_along_normal(face) * spacing;
    if (depth_count >= grid.cells_along_normal(face) || depth_count * spacing > half_width * (1.0 + 1e-12)) {
      fail(ErrorKind::InvalidArgument, "layer depth " + std::to_string(depth_count) + " cells exceeds the domain half-width");
    }
  }

  const Side sides[4] = {Side::Bottom, Side::Right, Side::Top, Side::Left};
  std::vector<LayerRow> rows;
  for (int group = 0; group < 5; ++group) {
    const bool all = group == 4;
    const std::string name = all ? "all" : side_name(sides[group]);
    for (int d = 0; d <= depth_count; ++d) {
      double sum = 0.0;
      double spacing_sum = 0.0;
      std::size_t count = 0;
      for (const BoundaryFace& face : faces) {
        if (!all && face.side != sides[group]) continue;
        sum += omega[grid.inward_cell(face, d)];
        spacing_sum += grid.normal_spacing(face);
        ++count;
      }
      const double depth = d * spacing_sum / static_cast<double>(count);
      rows.push_back({name, d, depth, nu > 0.0 ? depth / nu : std::numeric_limits<double>::infinity(),
                      sum / static_cast<double>(count)});
    }
  }
  return rows;
}

bool SweepReport::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const SweepRun& r) { return r.ok; });
}

bool SweepReport::cauchy_all() const { return std::all_of(cauchy.begin(), cauchy.end(), [](bool b) { return b; }); }

bool cauchy_verdict(std::span<const double> consecutive) {
  const std::size_t n = consecutive.size();
  const std::size_t first = n > 3 ? n - 3 : 0;
  for (std::size_t k = first; k < n; ++k) {
    if (!std::isfinite(consecutive[k])) return false;
  }
  for (std::size_t k = first + 1; k < n; ++k) {
    if (consecutive[k] > consecutive[k - 1]) return false;
  }
  return true;
}

namespace {

void execute_run(const SweepConfig& config, const Grid& coarse, SweepRun& out) {
  const RunSpec& base = config.base;
  const Grid grid(out.nx, out.ny, base.lx, base.ly);
  RunOptions options = base.options;
  const bool keep = config.entropy_audit || config.kinetic_audit;
  options.store_gradients = options.store_gradients || config.entropy_audit;
  options.keep_snapshots = keep;

  std::vector<double> last;
  const SnapshotSink sink = [&](const Snapshot& snap, const State&) {
    out.times.push_back(snap.t);
    out.masses.push_back(total_mass(grid, snap.omega));
    out.coarse.push_back(restrict_to_common_grid(grid, snap.omega, coarse));
    last = snap.omega;
  };
  Trajectory traj = run(grid, base.model, out.nu, base.boundary, base.initial(grid), options, sink);
  out.summary = traj.summary;

  const int half = std::min(grid.nx(), grid.ny()) / 2;
  out.layers = layer_profile(grid, last, out.nu, std::min(config.layer_depths, std::max(0, half - 1)));

  if (config.kinetic_audit && !traj.snapshots.empty()) {
    const KineticGrid kg = make_kinetic_grid(traj.summary.sup_abs_omega, config.xi_levels);
    out.kinetic = audit_kinetic_snapshots(traj.snapshots, kg);
    out.kinetic_spacing = kg.spacing();
  }
  if (config.entropy_audit) {
    const auto started = std::chrono::steady_clock::now();
    const AuditInput input = AuditInput::from_trajectory(traj);
    traj.snapshots.clear();
    traj.snapshots.shrink_to_fit();
    const std::vector<TestFunction> family = make_test_function_family(input.t_final(), base.lx, base.ly);
    const KineticGrid kg = make_kinetic_grid(input.max_abs_omega(), config.xi_levels);
    std::vector<double> levels(static_cast<std::size_t>(kg.n_xi));
    for (int k = 0; k < kg.n_xi; ++k) levels[k] = kg.level(k);
    out.entropy = audit_entropy(input, family, levels, ToleranceModel{}, 1);
    out.audit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  out.ok = true;
}

double lp_distance(std::span<const double> a, std::span<const double> b, int p, double area) {
  double sum = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) sum += std::pow(std::abs(a[c] - b[c]), p);
  return std::pow(sum * area, 1.0 / p);
}

}  // namespace

SweepReport run_sweep(const SweepConfig& config) {
  validate_sweep(config);
  const auto resolutions = sweep_resolutions(config);
  const Grid coarse(resolutions.front().first, resolutions.front().second, config.base.lx, config.base.ly);

  SweepReport report;
  report.scenario = config.scenario;
  report.norms = config.norms;
  report.runs.resize(config.viscosities.size());
  for (std::size_t k = 0; k < report.runs.size(); ++k) {
    report.runs[k].nu = config.viscosities[k];
    report.runs[k].nx = resolutions[k].first;
    report.runs[k].ny = resolutions[k].second;
  }

  // Largest grids first so the longest runs start early.
  std::vector<std::size_t> schedule(report.runs.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) schedule[k] = schedule.size() - 1 - k;
  detail::parallel_for(schedule.size(), config.threads, [&](std::size_t item, std::size_t) {
    SweepRun& r = report.runs[schedule[item]];
    try {
      execute_run(config, coarse, r);
    } catch (const std::exception& e) {
      r = SweepRun{r.nu, r.nx, r.ny, false, e.what(), {}, {}, {}, {}, {}, std::nullopt, std::nullopt};
    }
  });

  if (config.entropy_audit && report.runs.front().ok && report.runs.front().entropy) {
    const ResidualReport& baseline = *report.runs.front().entropy;
    report.entropy_tolerance = fit_tolerance(baseline.minimum, baseline.dx, baseline.dt);
    for (SweepRun& r : report.runs) {
      if (r.entropy) apply_tolerance(*r.entropy, *report.entropy_tolerance);
    }
  }

  const std::size_t n = report.runs.size();
  const SweepRun* reference = nullptr;
  for (const SweepRun& r : report.runs) {
    if (r.ok) {
      reference = &r;
      break;
    }
  }
  const double t_scale = config.base.options.t_final;
  if (reference) {
    for (double t : reference->times) {
      const bool everywhere = std::all_of(report.runs.begin(), report.runs.end(), [&](const SweepRun& r) {
        return !r.ok || std::any_of(r.times.begin(), r.times.end(), [&](double s) { return same_time(s, t, t_scale); });
      });
      if (everywhere) report.common_times.push_back(t);
    }
  }

  auto time_index = [&](const SweepRun& r, double t) {
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      if (same_time(r.times[k], t, t_scale)) return k;
    }
    return r.times.size();
  };

  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.distance.assign(config.norms.size(), std::vector<std::vector<double>>(n, std::vector<double>(n, nan)));
  for (std::size_t pi = 0; pi < config.norms.size(); ++pi) {
    const int p = config.norms[pi];
    for (std::size_t i = 0; i < n; ++i) {
      if (!report.runs[i].ok) continue;
      report.distance[pi][i][i] = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!report.runs[j].ok) continue;
        double worst = 0.0;
        for (double t : report.common_times) {
          const auto& a = report.runs[i].coarse[time_index(report.runs[i], t)];
          const auto& b = report.runs[j].coarse[time_index(report.runs[j], t)];
          worst = std::max(worst, lp_distance(a, b, p, coarse.cell_area()));
        }
        report.distance[pi][i][j] = worst;
        report.distance[pi][j][i] = worst;
      }
    }
    std::vector<double> consecutive;
    for (std::size_t k = 0; k + 1 < n; ++k) consecutive.push_back(report.distance[pi][k][k + 1]);
    report.cauchy.push_back(cauchy_verdict(consecutive));
  }
  return report;
}

}  // namespace vortexlayer

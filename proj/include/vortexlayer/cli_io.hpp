#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vortexlayer/boundary.hpp"
#include "vortexlayer/entropy_audit.hpp"
#include "vortexlayer/flux_models.hpp"
#include "vortexlayer/kinetic.hpp"
#include "vortexlayer/transport.hpp"
#include "vortexlayer/vanishing_viscosity.hpp"

namespace vortexlayer {

/// Initial data presets. Positions are fractions of the domain sides and
/// widths fractions of the shorter side.
struct InitialCondition {
  enum class Kind { Constant, Bump, TwoBump, Random };
  Kind kind = Kind::Constant;
  double value = 0.0;  ///< background level
  double amplitude = 1.0;
  double width = 0.1;
  double x0 = 0.5, y0 = 0.5;
  double x1 = 0.75, y1 = 0.75;
  double low = 0.0, high = 1.0;  ///< Random: uniform draw range
  bool clip = false;             ///< Random: clamp the draw to [0,1]

  std::vector<double> sample(const Grid& grid, std::uint64_t seed) const;
  /// Range guaranteed to contain every sampled value.
  double lower_bound() const;
  double upper_bound() const;
  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

std::string_view initial_kind_name(InitialCondition::Kind kind);

/// Complete description of a run (and of a sweep built around it).
struct RunConfig {
  std::string scenario = "custom";
  FluxModel model;
  int nx = 64;
  int ny = 64;
  double lx = 1.0;
  double ly = 1.0;
  double nu = 0.01;
  double t_final = 1.0;
  double cfl = 0.9;
  double output_interval = 0.0;  ///< 0: t_final / 64
  BoundaryData boundary;
  InitialCondition initial;
  std::uint64_t seed = 1;
  bool store_gradients = false;
  bool kinetic = false;
  bool audit = false;

  // Entropy tolerance constants; when absent the audit fits them on the run itself.
  std::optional<double> audit_c1;
  std::optional<double> audit_c2;

  // Sweep settings.
  std::vector<double> nu_list;  ///< empty: 0.1 * 2^-k, k = 0..5
  std::string grid_rule = "nu/4";
  std::vector<int> norms = {1, 2, 4};
  int layer_depths = 16;
  int xi_levels = 128;

  double effective_output_interval() const { return output_interval > 0.0 ? output_interval : t_final / 64.0; }
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Named scenario presets: "custom", "steady", "nucleation", "kellersegel".
RunConfig scenario_config(std::string_view name);
std::vector<std::string> scenario_names();

/// Parses the sectioned key = value format. A `scenario` key in [run] is
/// applied first, every other key overrides it. Throws Error(Parse) with the
/// line number and key on malformed input and Error(Validation) when the
/// result violates a constraint.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Sets one key as if it appeared in a config file, then revalidates.
void apply_config_key(RunConfig& config, std::string_view section, std::string_view key, std::string_view value);

/// Throws Error(Validation) naming the violated constraint.
void validate_config(const RunConfig& config);

/// Full explicit form; parse_config(print_config(c)) == c.
std::string print_config(const RunConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

// ---- snapshots ----

struct SnapshotHeader {
  double t = 0.0;
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double nu = 0.0;
  FluxModel model;
};

struct SnapshotFile {
  SnapshotHeader header;
  Snapshot snapshot;
};

void write_snapshot(const std::filesystem::path& path, const SnapshotHeader& header, const Snapshot& snapshot);
SnapshotFile read_snapshot(const std::filesystem::path& path);
std::string snapshot_filename(double t);

/// All snap_*.csv files in `dir`, read and ordered by time. Throws
/// Error(NoSnapshots) when there are none.
std::vector<SnapshotFile> read_snapshot_directory(const std::filesystem::path& dir);

// ---- CSV reports ----

void write_monitors(const std::filesystem::path& path, std::span<const StepReport> steps);
void write_entropy_report(const std::filesystem::path& path, const ResidualReport& report);
void write_sweep_report(const std::filesystem::path& path, const SweepReport& report);
void write_distances(const std::filesystem::path& path, const SweepReport& report);
void write_layers(const std::filesystem::path& path, const SweepReport& report);

struct KineticReport {
  KineticSnapshotAudit snapshots;
  double delta_xi = 0.0;
  std::vector<double> windows;           ///< time windows epsilon, halving
  std::vector<double> interior;          ///< interior trace functional per window
  std::vector<double> depths;            ///< boundary averaging depths
  std::vector<double> boundary;          ///< boundary trace functional per depth
  std::vector<double> levels;
  std::vector<double> defect_integral;   ///< int F dx per level, for the smallest window
  bool interior_decreasing() const;
};

void write_kinetic_report(const std::filesystem::path& path, const KineticReport& report);

// ---- orchestration ----

struct RunOutcome {
  RunSummary summary;
  double max_drift = 0.0;  ///< max |omega(T) - omega(0)| over cells
  std::size_t snapshots = 0;
};

/// Runs `config`, writing config.cfg, snapshots and monitors.csv into `dir`
/// (created if needed), then the audits the config enables.
RunOutcome run_to_directory(const RunConfig& config, const std::filesystem::path& dir);

struct AuditOutcome {
  ResidualReport entropy;
  BoundMonitors bounds;
  double measure_constant = 0.0;
  std::size_t measure_failures = 0;
};

/// Entropy audit over a finished run directory; writes entropy_report.csv
/// and bounds.csv.
AuditOutcome audit_directory(const std::filesystem::path& dir, std::size_t threads = 0);

/// Kinetic checks over a finished run directory; writes kinetic_report.csv.
KineticReport kinetic_directory(const std::filesystem::path& dir);

/// Builds the sweep for `config`; `nu_list` and `grid_rule` override the config.
SweepConfig make_sweep_config(const RunConfig& config);

/// Runs the sweep and writes config.cfg, sweep_report.csv, distances.csv and layers.csv.
SweepReport sweep_to_directory(const RunConfig& config, const std::filesystem::path& dir);

/// Comma separated numbers, e.g. "0.1,0.05".
std::vector<double> parse_number_list(std::string_view text);

}  // namespace vortexlayer

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "vortexlayer/elliptic.hpp"
#include "vortexlayer/flux_models.hpp"
#include "vortexlayer/geometry.hpp"

namespace vortexlayer {

/// A boundary function of (t, face) chosen from a few fixed shapes.
/// Presets are time independent; `t` is carried for the interface.
struct FacePreset {
  enum class Kind { Constant, Sinusoidal, PiecewiseSide };

  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  // Sinusoidal in counterclockwise arc length s:
  //   mean + amplitude * sin(2 pi periods s / perimeter + phase)
  double mean = 0.0;
  double amplitude = 0.0;
  double periods = 1.0;
  double phase = 0.0;
  // PiecewiseSide, indexed by Side.
  std::array<double, 4> sides{};

  static FacePreset constant(double v) {
    FacePreset p;
    p.value = v;
    return p;
  }

  double evaluate(double t, const BoundaryFace& face, double perimeter) const;
  /// Bounds of the preset over the whole boundary.
  double lower_bound() const;
  double upper_bound() const;

  friend bool operator==(const FacePreset&, const FacePreset&) = default;
};

std::string_view preset_kind_name(FacePreset::Kind kind);
FacePreset::Kind parse_preset_kind(std::string_view text);

/// Boundary data of the coupled problem: Dirichlet trace a for h and the
/// nucleation law b(t, x, z) = b0 + b1 * max(|z| - J, 0)^kappa for the
/// inflow value of omega.
struct BoundaryData {
  FacePreset a = FacePreset::constant(0.0);
  FacePreset b0 = FacePreset::constant(0.0);
  double b1 = 0.0;
  double kappa = 0.5;
  FacePreset threshold = FacePreset::constant(1.0);  // J, positive

  BoundaryTrace a_trace(const Grid& grid, double t) const;

  friend bool operator==(const BoundaryData&, const BoundaryData&) = default;
};

/// Throws Error(Validation) when kappa is outside (0,1), b0 can go negative,
/// b1 is negative, or J is not positive.
void validate_boundary_data(const BoundaryData& data);

double nucleation_b(const BoundaryData& data, double t, const BoundaryFace& face, double perimeter, double z);

/// b on every boundary face from the outward normal derivative of h.
BoundaryTrace nucleation_trace(const BoundaryData& data, const Grid& grid, double t,
                               std::span<const double> normal_derivatives);

/// M(v) = K * max over cells of max(|v_x|, |v_y|).
double robin_coefficient(const FluxModel& model, const VectorField& v);

/// True when characteristics enter the domain: g'(omega) (v.n) < 0.
inline bool inflow_indicator(const FluxModel& model, double omega_face, double v_dot_n) {
  return model.g_prime(omega_face) * v_dot_n < 0.0;
}

}  // namespace vortexlayer

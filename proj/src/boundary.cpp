#include "vortexlayer/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vortexlayer/error.hpp"

namespace vortexlayer {

double FacePreset::evaluate(double /*t*/, const BoundaryFace& face, double perimeter) const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Sinusoidal:
      return mean + amplitude * std::sin(2.0 * std::numbers::pi * periods * face.arc / perimeter + phase);
    case Kind::PiecewiseSide: return sides[static_cast<std::size_t>(face.side)];
  }
  return 0.0;
}

double FacePreset::lower_bound() const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Sinusoidal: return mean - std::abs(amplitude);
    case Kind::PiecewiseSide: return *std::min_element(sides.begin(), sides.end());
  }
  return 0.0;
}

double FacePreset::upper_bound() const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Sinusoidal: return mean + std::abs(amplitude);
    case Kind::PiecewiseSide: return *std::max_element(sides.begin(), sides.end());
  }
  return 0.0;
}

std::string_view preset_kind_name(FacePreset::Kind kind) {
  switch (kind) {
    case FacePreset::Kind::Constant: return "constant";
    case FacePreset::Kind::Sinusoidal: return "sinusoidal";
    case FacePreset::Kind::PiecewiseSide: return "piecewise";
  }
  return "constant";
}

FacePreset::Kind parse_preset_kind(std::string_view text) {
  if (text == "constant") return FacePreset::Kind::Constant;
  if (text == "sinusoidal") return FacePreset::Kind::Sinusoidal;
  if (text == "piecewise") return FacePreset::Kind::PiecewiseSide;
  fail(ErrorKind::Validation,
       "unknown boundary preset '" + std::string(text) + "' (expected constant, sinusoidal or piecewise)");
}

BoundaryTrace BoundaryData::a_trace(const Grid& grid, double t) const {
  const auto faces = grid.boundary_faces();
  BoundaryTrace trace(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) trace[f] = a.evaluate(t, faces[f], grid.perimeter());
  return trace;
}

void validate_boundary_data(const BoundaryData& data) {
  if (!(data.kappa > 0.0 && data.kappa < 1.0)) {
    fail(ErrorKind::Validation,
         "kappa must lie strictly inside (0,1); kappa = 1 is excluded because the L-infinity bound on omega "
         "fails for linear growth of the nucleation law");
  }
  if (data.b0.lower_bound() < 0.0) fail(ErrorKind::Validation, "b0 must be nonnegative on the whole boundary");
  if (data.b1 < 0.0) fail(ErrorKind::Validation, "b1 must be nonnegative");
  if (!(data.threshold.lower_bound() > 0.0)) {
    fail(ErrorKind::Validation, "nucleation threshold J must be positive on the whole boundary");
  }
}

double nucleation_b(const BoundaryData& data, double t, const BoundaryFace& face, double perimeter, double z) {
  const double base = data.b0.evaluate(t, face, perimeter);
  if (data.b1 == 0.0) return base;
  const double excess = std::abs(z) - data.threshold.evaluate(t, face, perimeter);
  if (excess <= 0.0) return base;
  return base + data.b1 * std::pow(excess, data.kappa);
}

BoundaryTrace nucleation_trace(const BoundaryData& data, const Grid& grid, double t,
                               std::span<const double> normal_derivatives) {
  const auto faces = grid.boundary_faces();
  BoundaryTrace b(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    b[f] = nucleation_b(data, t, faces[f], grid.perimeter(), normal_derivatives[f]);
  }
  return b;
}

double robin_coefficient(const FluxModel& model, const VectorField& v) {
  double vmax = 0.0;
  for (std::size_t c = 0; c < v.x.size(); ++c) vmax = std::max({vmax, std::abs(v.x[c]), std::abs(v.y[c])});
  return model.lipschitz() * vmax;
}

}  // namespace vortexlayer

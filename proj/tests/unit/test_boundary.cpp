#include <cmath>
#include <random>

#include "doctest.h"
#include "vortexlayer/boundary.hpp"
#include "vortexlayer/error.hpp"

using namespace vortexlayer;

namespace {

BoundaryData nucleation(double b0, double b1, double kappa, double J) {
  BoundaryData d;
  d.b0 = FacePreset::constant(b0);
  d.b1 = b1;
  d.kappa = kappa;
  d.threshold = FacePreset::constant(J);
  return d;
}

}  // namespace

TEST_CASE("nucleation_b examples") {
  const Grid g(4, 4, 1.0, 1.0);
  const BoundaryFace& f = g.boundary_faces()[0];
  CHECK(nucleation_b(nucleation(0.1, 0.5, 0.5, 1.0), 0.0, f, g.perimeter(), 5.0) == doctest::Approx(1.1));
  CHECK(nucleation_b(nucleation(0.1, 0.5, 0.5, 1.0), 0.0, f, g.perimeter(), -5.0) == doctest::Approx(1.1));
  CHECK(nucleation_b(nucleation(0.3, 0.0, 0.5, 1.0), 0.0, f, g.perimeter(), 42.0) == 0.3);
  CHECK(nucleation_b(nucleation(0.3, 2.0, 0.5, 1.0), 0.0, f, g.perimeter(), 0.99) == 0.3);
}

TEST_CASE("nucleation_b is continuous in z") {
  const Grid g(4, 4, 1.0, 1.0);
  const BoundaryFace& f = g.boundary_faces()[3];
  const BoundaryData d = nucleation(0.2, 0.7, 0.5, 1.0);
  for (double z = -3.0; z < 3.0; z += 0.01) {
    const double b1 = nucleation_b(d, 0.0, f, g.perimeter(), z);
    const double b2 = nucleation_b(d, 0.0, f, g.perimeter(), z + 1e-8);
    CHECK(std::abs(b1 - b2) < 1e-3);
  }
}

TEST_CASE("nucleation_trace follows the normal derivatives") {
  const Grid g(3, 3, 1.0, 1.0);
  const BoundaryData d = nucleation(0.1, 0.5, 0.5, 1.0);
  std::vector<double> z(g.boundary_faces().size(), 0.0);
  z[2] = 5.0;
  const BoundaryTrace b = nucleation_trace(d, g, 0.0, z);
  CHECK(b[2] == doctest::Approx(1.1));
  CHECK(b[0] == 0.1);
}

TEST_CASE("Keller-Segel compliant data keep b in [0,1]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  const Grid g(8, 8, 1.0, 1.0);
  BoundaryData d = nucleation(0.0, 0.0, 0.5, 1.0);
  d.b0.kind = FacePreset::Kind::Sinusoidal;
  d.b0.mean = 0.5;
  d.b0.amplitude = 0.5;
  validate_boundary_data(d);
  for (const BoundaryFace& f : g.boundary_faces()) {
    for (int k = 0; k < 50; ++k) {
      const double b = nucleation_b(d, 0.0, f, g.perimeter(), u(rng));
      CHECK(b >= 0.0);
      CHECK(b <= 1.0);
    }
  }
}

TEST_CASE("validate_boundary_data") {
  CHECK_NOTHROW(validate_boundary_data(nucleation(0.1, 0.5, 0.5, 1.0)));
  CHECK_THROWS_AS(validate_boundary_data(nucleation(0.1, 0.5, 1.0, 1.0)), Error);
  CHECK_THROWS_AS(validate_boundary_data(nucleation(0.1, 0.5, 0.0, 1.0)), Error);
  CHECK_THROWS_AS(validate_boundary_data(nucleation(-0.1, 0.5, 0.5, 1.0)), Error);
  CHECK_THROWS_AS(validate_boundary_data(nucleation(0.1, -0.5, 0.5, 1.0)), Error);
  CHECK_THROWS_AS(validate_boundary_data(nucleation(0.1, 0.5, 0.5, 0.0)), Error);
}

TEST_CASE("face presets") {
  const Grid g(4, 2, 2.0, 1.0);
  FacePreset s;
  s.kind = FacePreset::Kind::Sinusoidal;
  s.mean = 1.0;
  s.amplitude = 0.5;
  s.periods = 2.0;
  CHECK(s.lower_bound() == 0.5);
  CHECK(s.upper_bound() == 1.5);
  FacePreset p;
  p.kind = FacePreset::Kind::PiecewiseSide;
  p.sides = {1.0, 2.0, 3.0, 4.0};
  CHECK(p.lower_bound() == 1.0);
  CHECK(p.upper_bound() == 4.0);
  for (const BoundaryFace& f : g.boundary_faces()) {
    CHECK(p.evaluate(0.0, f, g.perimeter()) == 1.0 + static_cast<int>(f.side));
    const double v = s.evaluate(0.0, f, g.perimeter());
    CHECK(v == doctest::Approx(1.0 + 0.5 * std::sin(2.0 * 3.141592653589793 * 2.0 * f.arc / g.perimeter())));
  }
  CHECK(parse_preset_kind(preset_kind_name(FacePreset::Kind::PiecewiseSide)) == FacePreset::Kind::PiecewiseSide);
  CHECK_THROWS_AS(parse_preset_kind("spline"), Error);
}

TEST_CASE("robin_coefficient") {
  VectorField zero{std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
  CHECK(robin_coefficient(FluxModel::mean_field(), zero) == 0.0);
  VectorField v{{0.5, -3.0, 1.0, 0.0}, {2.0, 0.1, -1.5, 0.0}};
  CHECK(robin_coefficient(FluxModel::mean_field(), v) == 3.0);
  for (double& x : v.x) x *= 2.0;
  for (double& y : v.y) y *= 2.0;
  CHECK(robin_coefficient(FluxModel::keller_segel(), v) == 6.0);
}

TEST_CASE("inflow_indicator") {
  CHECK(inflow_indicator(FluxModel::mean_field(), 1.0, -0.2));
  CHECK_FALSE(inflow_indicator(FluxModel::mean_field(), 1.0, 0.2));
  CHECK_FALSE(inflow_indicator(FluxModel::keller_segel(), 0.5, -1.0));
  CHECK_FALSE(inflow_indicator(FluxModel::keller_segel(), 0.5, 1.0));
}

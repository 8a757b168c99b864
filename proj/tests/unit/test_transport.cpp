#include <algorithm>
#include <cmath>
#include <random>

#include "../support/upwind_oracle.hpp"
#include "doctest.h"
#include "vortexlayer/error.hpp"
#include "vortexlayer/transport.hpp"

using namespace vortexlayer;

namespace {

const FluxModel mf = FluxModel::mean_field();
const FluxModel ks = FluxModel::keller_segel();

std::vector<double> random_field(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = u(rng);
  return out;
}

BoundaryData constant_boundary(double a, double b0) {
  BoundaryData d;
  d.a = FacePreset::constant(a);
  d.b0 = FacePreset::constant(b0);
  return d;
}

}  // namespace

TEST_CASE("numerical flux examples") {
  CHECK(numerical_face_flux(mf, 0.5, 0.5, 2.0) == 1.0);
  CHECK(numerical_face_flux(mf, 0.3, -4.0, 0.0) == 0.0);
  CHECK(numerical_face_flux(ks, 0.9, 0.1, 0.0) == 0.0);
  CHECK(numerical_face_flux(ks, 0.5, 0.5, -1.0) == -0.25);
}

TEST_CASE("Robin diffusive flux examples") {
  CHECK(robin_diffusive_flux(0.1, 0.4, 0.4, 3.0) == 0.0);
  CHECK(robin_diffusive_flux(0.1, 0.5, 0.5, 2.0) == 0.0);
  CHECK(robin_diffusive_flux(0.1, 1.0, 0.0, 2.0) == -2.0);
}

TEST_CASE("stable_dt examples") {
  const Grid g(100, 100, 1.0, 1.0);
  CHECK(stable_dt(g, mf, 1.0, 0.0, 0.0, 0.9) == doctest::Approx(0.0045).epsilon(1e-12));
  CHECK(stable_dt(g, mf, 0.0, 0.0, 0.0, 0.9) > 1e20);
  const double dt1 = stable_dt(g, mf, 1e-6, 1.0, 0.0, 0.9);
  const double dt2 = stable_dt(g, mf, 1e-6, 2.0, 0.0, 0.9);
  CHECK(dt1 / dt2 == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(stable_dt(g, mf, 1.0, 0.0, 0.0, 1.5), Error);
}

TEST_CASE("constant state is an exact steady state") {
  const Grid g(16, 16, 1.0, 1.0);
  TransportSolver solver(g, mf, 0.05, constant_boundary(0.4, 0.4));
  State s = solver.initial_state(std::vector<double>(g.cell_count(), 0.4));
  for (double v : s.v.x) CHECK(v == 0.0);
  for (int k = 0; k < 100; ++k) {
    const StepReport r = solver.step(s, 0.01);
    CHECK(r.robin == 0.0);
  }
  for (double w : s.omega.values) CHECK(w == 0.4);
}

TEST_CASE("Keller-Segel step preserves [0,1]") {
  const Grid g(24, 24, 1.0, 1.0);
  BoundaryData d = constant_boundary(0.0, 0.3);
  d.a.kind = FacePreset::Kind::Sinusoidal;
  d.a.amplitude = 1.0;
  d.a.periods = 2.0;
  TransportSolver solver(g, ks, 0.01, d);
  State s = solver.initial_state(random_field(g.cell_count(), 0.0, 1.0, 9));
  for (int k = 0; k < 50; ++k) {
    const StepReport r = solver.step(s, solver.stable_dt(s, 0.9));
    CHECK(r.min_omega >= -1e-12);
    CHECK(r.max_omega <= 1.0 + 1e-12);
  }
}

TEST_CASE("every step satisfies the mass identity") {
  const Grid g(20, 12, 1.0, 0.6);
  BoundaryData d = constant_boundary(0.2, 0.5);
  d.a.kind = FacePreset::Kind::Sinusoidal;
  d.a.amplitude = 0.5;
  d.b1 = 0.5;
  d.threshold = FacePreset::constant(0.1);
  TransportSolver solver(g, mf, 0.02, d);
  State s = solver.initial_state(random_field(g.cell_count(), -1.0, 2.0, 4));
  for (int k = 0; k < 40; ++k) {
    const StepReport r = solver.step(s, solver.stable_dt(s, 0.9));
    CHECK(std::abs(r.mass_residual()) <= 1e-12 * r.mass_scale());
  }
}

TEST_CASE("frozen zero-viscosity step matches the 1D upwind oracle") {
  for (double c : {0.7, -1.3}) {
    const Grid g(37, 3, 1.0, 0.25);
    std::vector<double> w = random_field(g.cell_count(), 0.0, 2.0, 17);
    const double b = 0.6;
    const FrozenCoefficients coeffs = testing::uniform_x_velocity(g, c, b);
    const double dt = stable_dt(g, mf, std::abs(c), 0.0, 0.0, 0.9);
    std::vector<double> next(w.size());
    conservative_update(g, mf, 0.0, coeffs, w, dt, next);
    const std::vector<double> oracle = testing::upwind_rows(g, w, c, b, dt);
    for (std::size_t k = 0; k < w.size(); ++k) CHECK(std::abs(next[k] - oracle[k]) <= 1e-14);
  }
}

TEST_CASE("monotone scheme preserves ordering") {
  const Grid g(16, 16, 1.0, 1.0);
  FrozenCoefficients coeffs;
  coeffs.v.x = random_field(g.cell_count(), -1.0, 1.0, 1);
  coeffs.v.y = random_field(g.cell_count(), -1.0, 1.0, 2);
  for (const BoundaryFace& f : g.boundary_faces()) {
    coeffs.boundary_vn.push_back(coeffs.v.x[f.owner] * f.normal.x + coeffs.v.y[f.owner] * f.normal.y);
  }
  coeffs.b.assign(g.boundary_faces().size(), 0.5);
  for (const FluxModel& m : {mf, ks}) {
    const std::vector<double> lo = random_field(g.cell_count(), -0.5, 1.0, 3);
    std::vector<double> hi = lo;
    const std::vector<double> bump = random_field(g.cell_count(), 0.0, 0.5, 4);
    for (std::size_t c = 0; c < hi.size(); ++c) hi[c] += bump[c];
    const double dt = stable_dt(g, m, coeffs.v, 0.0, 0.0, 0.9);
    std::vector<double> lo_next(lo.size());
    std::vector<double> hi_next(hi.size());
    conservative_update(g, m, 0.0, coeffs, lo, dt, lo_next);
    conservative_update(g, m, 0.0, coeffs, hi, dt, hi_next);
    for (std::size_t c = 0; c < lo.size(); ++c) CHECK(lo_next[c] <= hi_next[c] + 1e-15);
  }
}

TEST_CASE("periodic strip conserves mass and constants") {
  const Grid g(32, 8, 1.0, 0.25);
  const std::vector<double> w = random_field(g.cell_count(), 0.0, 1.0, 8);
  const std::vector<double> next = periodic_strip_update(g, mf, w, {0.8, 0.3}, 0.01, 0.002);
  CHECK(total_mass(g, next) == doctest::Approx(total_mass(g, w)).epsilon(1e-14));
  const std::vector<double> flat(g.cell_count(), 0.25);
  for (double v : periodic_strip_update(g, ks, flat, {0.5, 0.0}, 0.01, 0.002)) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("run emits snapshots and summary") {
  const Grid g(12, 12, 1.0, 1.0);
  RunOptions opt;
  opt.t_final = 0.0;
  const Trajectory t0 = run(g, mf, 0.01, constant_boundary(0.0, 0.0), std::vector<double>(g.cell_count(), 0.1), opt);
  CHECK(t0.snapshots.size() == 1);
  CHECK(t0.steps.empty());

  opt.t_final = 0.2;
  opt.output_interval = 0.05;
  opt.store_gradients = true;
  std::size_t sink_calls = 0;
  const Trajectory t1 = run(g, mf, 0.01, constant_boundary(0.1, 0.3), random_field(g.cell_count(), 0.0, 1.0, 2), opt,
                            [&](const Snapshot&, const State&) { ++sink_calls; });
  CHECK(t1.snapshots.size() == 5);
  CHECK(sink_calls == 5);
  CHECK(t1.snapshots.back().t == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(t1.snapshots.front().grad_omega.has_value());
  CHECK(t1.summary.steps == static_cast<int>(t1.steps.size()));
  CHECK(t1.summary.max_relative_mass_residual <= 1e-12);
  CHECK(t1.summary.energy_bound() > 0.0);
}

TEST_CASE("an unstable step is reported as blow-up") {
  const Grid g(32, 32, 1.0, 1.0);
  TransportSolver solver(g, mf, 0.1, constant_boundary(0.0, 0.0));
  State s = solver.initial_state(random_field(g.cell_count(), 0.0, 1.0, 5));
  try {
    solver.step(s, 1e6);
    FAIL("expected blow-up");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BlowUp);
  }
}

TEST_CASE("cell gradient and total mass") {
  const Grid g(10, 10, 1.0, 1.0);
  std::vector<double> w(g.cell_count());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = 2.0 * g.center(c).x - g.center(c).y;
  const VectorField grad = cell_gradient(g, w);
  for (std::size_t c = 0; c < w.size(); ++c) {
    CHECK(grad.x[c] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(grad.y[c] == doctest::Approx(-1.0).epsilon(1e-12));
  }
  CHECK(total_mass(g, std::vector<double>(g.cell_count(), 3.0)) == doctest::Approx(3.0).epsilon(1e-14));
}

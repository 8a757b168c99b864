#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "vortexlayer/elliptic.hpp"
#include "vortexlayer/error.hpp"

using namespace vortexlayer;

namespace {

constexpr double pi = std::numbers::pi;

template <class F>
std::vector<double> cell_values(const Grid& g, F&& f) {
  std::vector<double> out(g.cell_count());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const Vec2 p = g.center(c);
    out[c] = f(p.x, p.y);
  }
  return out;
}

template <class F>
BoundaryTrace face_values(const Grid& g, F&& f) {
  BoundaryTrace out;
  for (const BoundaryFace& face : g.boundary_faces()) out.push_back(f(face.midpoint.x, face.midpoint.y));
  return out;
}

double manufactured_error(int n, Preconditioner pc = Preconditioner::FastSine) {
  const Grid g(n, n, 1.0, 1.0);
  const auto exact = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  const auto source = cell_values(g, [&](double x, double y) { return (1.0 + 2.0 * pi * pi) * exact(x, y); });
  const BoundaryTrace zero(g.boundary_faces().size(), 0.0);
  EllipticOptions opt;
  opt.preconditioner = pc;
  const ScalarField h = solve_screened_poisson(g, source, zero, opt);
  double sum = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Vec2 p = g.center(c);
    const double e = h.values[c] - exact(p.x, p.y);
    sum += e * e * g.cell_area();
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("constant data give the constant solution") {
  const Grid g(12, 9, 1.0, 0.75);
  const std::vector<double> two(g.cell_count(), 2.0);
  const BoundaryTrace a2(g.boundary_faces().size(), 2.0);
  const ScalarField h = solve_screened_poisson(g, two, a2);
  for (double v : h.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

  const std::vector<double> zero(g.cell_count(), 0.0);
  const BoundaryTrace a0(g.boundary_faces().size(), 0.0);
  for (double v : solve_screened_poisson(g, zero, a0).values) CHECK(v == 0.0);
}

TEST_CASE("background solve") {
  const Grid g(16, 16, 1.0, 1.0);
  const BoundaryTrace c(g.boundary_faces().size(), 0.7);
  const ScalarField hc = solve_background(g, c);
  for (double v : hc.values) {
    CHECK(v > 0.0);
    CHECK(v < 0.7);
  }
  // Zero source: the solution sags below the trace, deepest at the center.
  CHECK(hc.values[g.index(0, 0)] > hc.values[g.index(7, 7)]);
  CHECK(hc.values[g.index(3, 5)] == doctest::Approx(hc.values[g.index(5, 3)]).epsilon(1e-10));
  const BoundaryTrace zero(g.boundary_faces().size(), 0.0);
  for (double v : solve_background(g, zero).values) CHECK(v == 0.0);

  BoundaryTrace one_side(g.boundary_faces().size(), 0.0);
  for (std::size_t k = 0; k < one_side.size(); ++k) {
    if (g.boundary_faces()[k].side == Side::Left) one_side[k] = 1.0;
  }
  const ScalarField h = solve_background(g, one_side);
  for (double v : h.values) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("discrete maximum principle with a source") {
  const Grid g(20, 14, 1.0, 0.7);
  const auto source = cell_values(g, [](double x, double y) { return std::cos(7 * x) * std::sin(5 * y) + 0.3; });
  const BoundaryTrace a = face_values(g, [](double x, double y) { return 0.5 * x - 0.2 * y; });
  const ScalarField h = solve_screened_poisson(g, source, a);
  const double lo = std::min(*std::min_element(source.begin(), source.end()), *std::min_element(a.begin(), a.end()));
  const double hi = std::max(*std::max_element(source.begin(), source.end()), *std::max_element(a.begin(), a.end()));
  for (double v : h.values) {
    CHECK(v >= lo - 1e-10);
    CHECK(v <= hi + 1e-10);
  }
}

TEST_CASE("manufactured solution converges at second order") {
  const double e32 = manufactured_error(32);
  const double e64 = manufactured_error(64);
  const double ratio = e32 / e64;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("preconditioned and plain CG agree") {
  const Grid g(24, 17, 1.2, 0.9);
  const auto source = cell_values(g, [](double x, double y) { return x * x - y; });
  const BoundaryTrace a = face_values(g, [](double x, double y) { return std::sin(3 * x + y); });
  EllipticOptions plain;
  plain.preconditioner = Preconditioner::None;
  const ScalarField h1 = solve_screened_poisson(g, source, a);
  const ScalarField h2 = solve_screened_poisson(g, source, a, plain);
  for (std::size_t c = 0; c < g.cell_count(); ++c) CHECK(h1.values[c] == doctest::Approx(h2.values[c]).epsilon(1e-8));
}

TEST_CASE("solver is deterministic and reports residual") {
  const Grid g(32, 32, 1.0, 1.0);
  const auto source = cell_values(g, [](double x, double y) { return std::exp(x - y); });
  const BoundaryTrace a = face_values(g, [](double x, double) { return x; });
  EllipticSolver s1(g);
  EllipticSolver s2(g);
  const EllipticResult r1 = s1.solve(source, a);
  const EllipticResult r2 = s2.solve(source, a);
  CHECK(r1.h.values == r2.h.values);
  CHECK(r1.relative_residual <= 1e-10);
  CHECK(r1.iterations > 0);
}

TEST_CASE("iteration cap raises SolverDivergence") {
  const Grid g(32, 32, 1.0, 1.0);
  const auto source = cell_values(g, [](double x, double y) { return std::sin(9 * x) * y; });
  const BoundaryTrace a(g.boundary_faces().size(), 0.0);
  EllipticOptions opt;
  opt.preconditioner = Preconditioner::None;
  opt.max_iterations = 2;
  try {
    solve_screened_poisson(g, source, a, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SolverDivergence);
  }
}

TEST_CASE("velocity of linear and constant fields") {
  const Grid g(10, 8, 1.0, 0.8);
  const auto hx = cell_values(g, [](double x, double) { return x; });
  const BoundaryTrace ax = face_values(g, [](double x, double) { return x; });
  const VectorField v = velocity(g, hx, ax);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    CHECK(v.x[c] == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(std::abs(v.y[c]) < 1e-13);
  }
  const std::vector<double> hc(g.cell_count(), 0.3);
  const BoundaryTrace ac(g.boundary_faces().size(), 0.3);
  const VectorField v0 = velocity(g, hc, ac);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    CHECK(v0.x[c] == 0.0);
    CHECK(v0.y[c] == 0.0);
  }
}

TEST_CASE("velocity of a smooth field is second order") {
  auto max_error = [](int n) {
    const Grid g(n, n, 1.0, 1.0);
    const auto h = cell_values(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    const BoundaryTrace a = face_values(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    const VectorField v = velocity(g, h, a);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const Vec2 p = g.center(c);
      err = std::max(err, std::abs(v.x[c] + pi * std::cos(pi * p.x) * std::sin(pi * p.y)));
      err = std::max(err, std::abs(v.y[c] + pi * std::sin(pi * p.x) * std::cos(pi * p.y)));
    }
    return err;
  };
  const double ratio = max_error(32) / max_error(64);
  CHECK(ratio > 3.0);
}

TEST_CASE("normal derivative examples") {
  const Grid g(16, 16, 1.0, 1.0);
  const std::vector<double> hc(g.cell_count(), 1.5);
  const BoundaryTrace ac(g.boundary_faces().size(), 1.5);
  for (double d : normal_derivative(g, hc, ac)) CHECK(d == 0.0);

  const auto hx = cell_values(g, [](double x, double) { return x; });
  const BoundaryTrace ax = face_values(g, [](double x, double) { return x; });
  const std::vector<double> dn = normal_derivative(g, hx, ax);
  const auto faces = g.boundary_faces();
  for (std::size_t k = 0; k < faces.size(); ++k) {
    if (faces[k].side == Side::Right) CHECK(dn[k] == doctest::Approx(1.0).epsilon(1e-12));
    if (faces[k].side == Side::Left) CHECK(dn[k] == doctest::Approx(-1.0).epsilon(1e-12));
    if (faces[k].side == Side::Top || faces[k].side == Side::Bottom) CHECK(std::abs(dn[k]) < 1e-12);
  }
}

TEST_CASE("second difference ratio stays bounded under refinement") {
  auto ratio = [](int n) {
    const Grid g(n, n, 1.0, 1.0);
    const auto source = cell_values(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    const BoundaryTrace a(g.boundary_faces().size(), 0.0);
    const ScalarField h = solve_screened_poisson(g, source, a);
    return second_difference_ratio(g, h.values, source, a);
  };
  const double r16 = ratio(16);
  const double r64 = ratio(64);
  CHECK(r16 > 0.0);
  CHECK(r64 < 2.0 * r16);
}

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "vortexlayer/error.hpp"
#include "vortexlayer/vanishing_viscosity.hpp"

using namespace vortexlayer;

namespace {

SweepConfig small_sweep(std::vector<double> viscosities) {
  SweepConfig c;
  c.base.lx = c.base.ly = 0.25;
  c.base.boundary.a.kind = FacePreset::Kind::Sinusoidal;
  c.base.boundary.a.amplitude = 0.25;
  c.base.boundary.b0 = FacePreset::constant(0.5);
  c.base.initial = [](const Grid& g) {
    std::vector<double> w(g.cell_count());
    for (std::size_t k = 0; k < w.size(); ++k) {
      const Vec2 p = g.center(k);
      w[k] = std::exp(-((p.x - 0.125) * (p.x - 0.125) + (p.y - 0.125) * (p.y - 0.125)) / 0.002);
    }
    return w;
  };
  c.base.options.t_final = 0.05;
  c.base.options.output_interval = 0.05 / 16;
  c.viscosities = std::move(viscosities);
  c.layer_depths = 3;
  return c;
}

}  // namespace

TEST_CASE("grid rules") {
  const GridRule r = parse_grid_rule("nu/4");
  CHECK(r.kind == GridRule::Kind::Resolved);
  CHECK(r.ratio == 4.0);
  const GridRule f = parse_grid_rule("fixed:80");
  CHECK(f.kind == GridRule::Kind::Fixed);
  CHECK(f.fixed_nx == 80);
  CHECK(parse_grid_rule("fixed").kind == GridRule::Kind::Fixed);
  CHECK(parse_grid_rule(r.describe()).ratio == 4.0);
  CHECK_THROWS_AS(parse_grid_rule("nu/0"), Error);
  CHECK_THROWS_AS(parse_grid_rule("fixed:1"), Error);
  CHECK_THROWS_AS(parse_grid_rule("adaptive"), Error);
}

TEST_CASE("geometric viscosities") {
  const std::vector<double> nus = geometric_viscosities(0.1, 6);
  REQUIRE(nus.size() == 6);
  CHECK(nus[0] == 0.1);
  CHECK(nus[5] == doctest::Approx(0.1 / 32));
}

TEST_CASE("sweep validation") {
  CHECK_NOTHROW(validate_sweep(small_sweep({0.1, 0.05})));
  CHECK_THROWS_AS(validate_sweep(small_sweep({})), Error);
  CHECK_THROWS_AS(validate_sweep(small_sweep({0.05, 0.1})), Error);
  CHECK_THROWS_AS(validate_sweep(small_sweep({0.1, -0.05})), Error);
  CHECK_NOTHROW(validate_sweep(small_sweep({0.1, 0.1})));
  SweepConfig huge = small_sweep({1e-6});
  CHECK_THROWS_AS(validate_sweep(huge), Error);
  SweepConfig bad_norm = small_sweep({0.1});
  bad_norm.norms = {0};
  CHECK_THROWS_AS(validate_sweep(bad_norm), Error);
}

TEST_CASE("sweep resolutions follow the viscosity and nest") {
  const auto res = sweep_resolutions(small_sweep(geometric_viscosities(0.1, 4)));
  REQUIRE(res.size() == 4);
  CHECK(res[0].first == 10);
  for (const auto& [nx, ny] : res) {
    CHECK(nx % res[0].first == 0);
    CHECK(ny % res[0].second == 0);
  }
  CHECK(res[3].first >= 80);
  SweepConfig fixed = small_sweep({0.1, 0.05});
  fixed.grid_rule = parse_grid_rule("fixed:32");
  for (const auto& [nx, ny] : sweep_resolutions(fixed)) {
    CHECK(nx == 32);
    CHECK(ny == 32);
  }
}

TEST_CASE("restriction to the common grid") {
  const Grid coarse(2, 2, 1.0, 1.0);
  const Grid fine(4, 4, 1.0, 1.0);
  const std::vector<double> flat(fine.cell_count(), 0.3);
  for (double v : restrict_to_common_grid(fine, flat, coarse)) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));

  const Grid strip(2, 4, 1.0, 1.0);
  const Grid half(2, 2, 1.0, 1.0);
  const std::vector<double> rows = {0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 4.0, 4.0};
  const std::vector<double> merged = restrict_to_common_grid(strip, rows, half);
  CHECK(merged[0] == 0.5);
  CHECK(merged[2] == 3.0);

  std::vector<double> w(fine.cell_count());
  std::iota(w.begin(), w.end(), -3.0);
  const std::vector<double> r = restrict_to_common_grid(fine, w, coarse);
  const double fine_mass = std::accumulate(w.begin(), w.end(), 0.0) * fine.cell_area();
  const double coarse_mass = std::accumulate(r.begin(), r.end(), 0.0) * coarse.cell_area();
  CHECK(std::abs(fine_mass - coarse_mass) <= 1e-14 * std::abs(fine_mass));

  CHECK_THROWS_AS(restrict_to_common_grid(Grid(5, 4, 1.0, 1.0), std::vector<double>(20, 0.0), coarse), Error);
  CHECK_THROWS_AS(restrict_to_common_grid(Grid(4, 4, 2.0, 1.0), std::vector<double>(16, 0.0), coarse), Error);
}

TEST_CASE("layer profiles") {
  const Grid g(10, 10, 1.0, 1.0);
  const std::vector<LayerRow> flat = layer_profile(g, std::vector<double>(g.cell_count(), 0.7), 0.1, 3);
  CHECK(flat.size() == 5 * 4);
  for (const LayerRow& row : flat) {
    CHECK(row.omega == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(row.depth_over_nu == doctest::Approx(row.depth / 0.1));
  }

  std::vector<double> w(g.cell_count());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = static_cast<double>(c);
  double bottom = 0.0;
  for (int i = 0; i < g.nx(); ++i) bottom += w[g.index(i, 0)];
  for (const LayerRow& row : layer_profile(g, w, 0.1, 2)) {
    if (row.group == "bottom" && row.depth_index == 0) CHECK(row.omega == doctest::Approx(bottom / g.nx()));
  }
  CHECK_THROWS_AS(layer_profile(g, w, 0.1, 6), Error);
}

TEST_CASE("cauchy verdict") {
  CHECK(cauchy_verdict(std::vector<double>{}));
  CHECK(cauchy_verdict(std::vector<double>{0.4}));
  CHECK(cauchy_verdict(std::vector<double>{0.1, 0.5, 0.4, 0.4, 0.3}));
  CHECK_FALSE(cauchy_verdict(std::vector<double>{0.5, 0.4, 0.3, 0.35}));
}

TEST_CASE("single-entry sweep is trivial") {
  const SweepReport r = run_sweep(small_sweep({0.1}));
  REQUIRE(r.runs.size() == 1);
  CHECK(r.runs[0].ok);
  CHECK(r.all_ok());
  CHECK(r.distance[0].size() == 1);
  CHECK(r.cauchy_all());
}

TEST_CASE("identical viscosities give zero distance and reruns are bit-identical") {
  SweepConfig c = small_sweep({0.1, 0.1, 0.05});
  c.threads = 2;
  const SweepReport a = run_sweep(c);
  REQUIRE(a.all_ok());
  for (std::size_t p = 0; p < a.norms.size(); ++p) CHECK(a.get(p, 0, 1) == 0.0);
  CHECK(a.get(0, 0, 2) > 0.0);
  CHECK(a.get(0, 0, 2) == a.get(0, 2, 0));
  const SweepReport b = run_sweep(c);
  CHECK(a.distance == b.distance);
  CHECK(a.runs[2].layers.size() == 5 * 4);
  CHECK(a.common_times.size() == 17);
}

TEST_CASE("sweep with audits attaches reports and a frozen tolerance") {
  SweepConfig c = small_sweep({0.1, 0.05});
  c.entropy_audit = true;
  c.kinetic_audit = true;
  c.xi_levels = 16;
  c.base.options.output_interval = 0.05 / 64;
  const SweepReport r = run_sweep(c);
  REQUIRE(r.all_ok());
  REQUIRE(r.entropy_tolerance.has_value());
  for (const SweepRun& run : r.runs) {
    REQUIRE(run.entropy.has_value());
    CHECK(run.entropy->model.c1 == r.entropy_tolerance->c1);
    REQUIRE(run.kinetic.has_value());
    CHECK(run.kinetic->max_rho_violation <= 0.0);
  }
  CHECK(r.runs[0].entropy->pass());
}

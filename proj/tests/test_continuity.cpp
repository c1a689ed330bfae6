#include "fixtures.hpp"
#include "srf/continuity.hpp"
#include "srf/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace srf;

TEST_CASE("default path grid") {
  const std::vector<double> g = default_t_grid();
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK(std::count(g.begin(), g.end(), 1.0 - 0x1p-10) == 1);
}

TEST_CASE("round reference is a solution along the whole path") {
  const BackgroundPtr bg = make_background({2, 2, 64});
  const MetricState ref = validate_state(Field::zeros(bg->grid), bg);
  const ContinuityPath path = solve_path(ref, default_t_grid());
  for (const ContinuityPoint& p : path.points) {
    CHECK(p.psi.max_abs() < 1e-12);
    CHECK(p.energy.M == 0.0);
  }
  const MonotonicityReport m = path_monotonicity(path);
  CHECK(m.max_M_increase == 0.0);
  CHECK(m.max_IJ_decrease == 0.0);
}

TEST_CASE("perturbed reference reaches the Einstein metric") {
  const BackgroundPtr bg = make_background({2, 2, 128});
  const MetricState ref = validate_state(fixtures::p2(bg->grid, 0.3), bg);
  const ContinuityPath path = solve_path(ref, default_t_grid());
  REQUIRE(path.points.size() == default_t_grid().size());
  for (const ContinuityPoint& p : path.points) {
    CHECK(p.residual < 1e-10);
    CHECK(p.history.back() == p.residual);
  }
  const ContinuityPoint& end = path.points.back();
  const MetricState e = validate_state(ref.phi + end.psi, bg);
  CHECK((e.R - 1.0).max_abs() < 1e-6);
  CHECK(continuity_residual(end.psi, ref, 1.0).max_abs() < 1e-10);

  const MonotonicityReport m = path_monotonicity(path);
  CHECK(m.M_nonincreasing);
  CHECK(m.IJ_nondecreasing);
  CHECK(m.M_violations.empty());

  // A finer grid gives the same picture.
  std::vector<double> fine;
  const std::vector<double> g = default_t_grid();
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    fine.push_back(g[i]);
    fine.push_back(0.5 * (g[i] + g[i + 1]));
  }
  fine.push_back(1.0);
  const MonotonicityReport mf = path_monotonicity(solve_path(ref, fine));
  CHECK(mf.M_violations.empty());
  CHECK(mf.IJ_violations.empty());
}

TEST_CASE("grid and configuration validation") {
  const BackgroundPtr bg = make_background({2, 2, 64});
  const MetricState ref = validate_state(Field::zeros(bg->grid), bg);
  const std::vector<double> late{0.1, 0.5, 1.0};
  const std::vector<double> back{0.0, 0.5, 0.4};
  const std::vector<double> over{0.0, 0.5, 1.5};
  CHECK_THROWS_AS(solve_path(ref, late), ConfigError);
  CHECK_THROWS_AS(solve_path(ref, back), ConfigError);
  CHECK_THROWS_AS(solve_path(ref, over), ConfigError);
  NewtonConfig bad;
  bad.max_iter = 0;
  CHECK_THROWS_AS(solve_path(ref, default_t_grid(), bad), ConfigError);

  const std::vector<double> short_grid{0.0, 0.5, 1.0};
  CHECK_THROWS_AS(path_monotonicity(solve_path(ref, short_grid)), UsageError);
}

TEST_CASE("no Einstein metric on the football") {
  const BackgroundPtr bg = make_background({2, 1, 64});
  const MetricState ref = validate_state(Field::zeros(bg->grid), bg);
  try {
    solve_path(ref, default_t_grid());
    FAIL("expected the path to terminate");
  } catch (const PathTermination& e) {
    CHECK(e.last_good_t() < 1.0);
  }
}

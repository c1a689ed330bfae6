#include "fixtures.hpp"
#include "srf/errors.hpp"
#include "srf/flow.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace srf;

namespace {

Trajectory synthetic(const std::function<double(double)>& Y, int n = 100, double t_end = 20.0) {
  Trajectory tr;
  for (int i = 0; i < n; ++i) {
    DiagnosticsRow r;
    r.t = t_end * i / (n - 1);
    r.Y = Y(r.t);
    tr.rows.push_back(r);
  }
  return tr;
}

FlowState advance(FlowState s, const BackgroundPtr& bg, double dt, double t_end, const FlowConfig& cfg) {
  const int steps = static_cast<int>(std::lround(t_end / dt));
  for (int k = 0; k < steps; ++k) s = step(s, bg, dt, cfg);
  return s;
}

}  // namespace

TEST_CASE("round metric is a fixed point") {
  const Trajectory& tr = fixtures::run("round", 1.0);
  CHECK_FALSE(tr.gauged);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr.samples[i].phi(1.0).max_abs() < 1e-12);
    CHECK(tr.rows[i].Y == 0.0);
  }
}

TEST_CASE("Rosenbrock step is second order") {
  const BackgroundPtr bg = make_background({2, 2, 64});
  FlowConfig cfg;
  cfg.rtol = 1e3;
  const FlowState s0 = initial_state(fixtures::p2(bg->grid, 0.3));
  const double T = 0.4;
  const Field a = advance(s0, bg, 0.02, T, cfg).psi;
  const Field b = advance(s0, bg, 0.01, T, cfg).psi;
  const Field c = advance(s0, bg, 0.005, T, cfg).psi;
  const double ratio = (a - b).max_abs() / (b - c).max_abs();
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("flow speed equals the Ricci potential up to a constant") {
  // Pure flow: dphi/dt = u - c(t).
  for (auto sl : {std::pair{2.0, 2.0}, std::pair{2.0, 1.0}}) {
    const BackgroundPtr bg = make_background({sl.first, sl.second, 64});
    FlowConfig cfg;
    cfg.rtol = 1e3;
    const MetricState s0 = validate_state(fixtures::p2(bg->grid, 0.2), bg);
    // The early flow is fast; h keeps the h^2 truncation of the quotient small.
    const double h = 1e-5;
    const MetricState s1 = step(s0, h, cfg), s2 = step(s1, h, cfg);
    const Field dphi = (1.0 / (2 * h)) * (-3.0 * s0.phi + 4.0 * s1.phi - s2.phi);
    const Field gap = dphi - s0.u;
    CHECK(gap.max() - gap.min() < 1e-5);
    CHECK(s1.t == doctest::Approx(h));
  }
}

TEST_CASE("limit detection on synthetic series") {
  const FlowConfig cfg;
  const LimitVerdict conv = detect_limit(synthetic([](double t) { return std::exp(-4.0 * t); }), cfg);
  CHECK(conv.kind == VerdictKind::Converged);
  CHECK(conv.rate == doctest::Approx(4.0).epsilon(1e-10));

  const LimitVerdict zero = detect_limit(synthetic([](double) { return 0.0; }), cfg);
  CHECK(zero.kind == VerdictKind::Converged);
  CHECK(std::isinf(zero.rate));

  const LimitVerdict floor = detect_limit(synthetic([](double t) { return 0.1 + 0.05 * std::exp(-t); }), cfg);
  CHECK(floor.kind == VerdictKind::SolitonFloor);
  CHECK(std::abs(floor.slope) < 1e-3);

  // Decaying but still above the convergence level.
  const LimitVerdict slow = detect_limit(synthetic([](double t) { return std::exp(-0.2 * t); }), cfg);
  CHECK(slow.kind == VerdictKind::Undecided);

  const LimitVerdict few = detect_limit(synthetic([](double t) { return std::exp(-4.0 * t); }, 19), cfg);
  CHECK(few.kind == VerdictKind::Undecided);
  CHECK(std::isnan(few.rate));
  CHECK(to_string(VerdictKind::SolitonFloor) == "soliton_floor");
}

TEST_CASE("renormalized initial constant") {
  const Trajectory& round = fixtures::run("round", 1.0);
  const Renormalization r = renormalize_initial(round);
  CHECK(r.c0 == 0.0);
  CHECK(std::abs(r.c0_direct) < 1e-14);
  for (std::size_t i = 0; i < round.size(); ++i)
    CHECK((r.trajectory.samples[i].phi(1.0) - round.samples[i].phi(1.0)).max_abs() < 1e-14);

  CHECK_THROWS_AS(renormalize_initial(fixtures::run("football", 2.0)), RenormalizationUnavailable);
  Trajectory bare = integrate_flow(Field::zeros(round.bg->grid), round.bg, FlowConfig{.t_end = 0.1});
  CHECK_THROWS_AS(renormalize_initial(bare), RenormalizationUnavailable);
}

TEST_CASE("renormalization forgets the additive constant") {
  const BackgroundPtr bg = make_background({2, 2, 64});
  FlowConfig cfg;
  cfg.t_end = 8.0;
  const Field phi0 = fixtures::p2(bg->grid, 0.3);
  const Renormalization a = renormalize_initial(run(phi0, bg, cfg), cfg);
  const Renormalization b = renormalize_initial(run(phi0 + 5.0, bg, cfg), cfg);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.trajectory.size(); ++i)
    worst = std::max(worst, (a.trajectory.samples[i].phi(1.0) - b.trajectory.samples[i].phi(1.0)).max_abs());
  CHECK(worst < 1e-6);
  CHECK(std::abs(a.c0 - a.c0_direct) < 1e-3);
  CHECK(a.sup_phidot <= 2.0 * a.sup_u);
}

TEST_CASE("explicit scheme hits the stiffness wall") {
  const BackgroundPtr bg = make_background({2, 2, 128});
  FlowConfig cfg;
  cfg.scheme = Scheme::ExplicitRk;
  cfg.dt_min = 1e-5;
  cfg.t_end = 1.0;
  try {
    integrate_flow(fixtures::p2(bg->grid, 0.3), bg, cfg);
    FAIL("expected a stiff failure");
  } catch (const StiffFailure& e) {
    CHECK(e.last_dt() < 1e-5);
    CHECK(e.time() < 1.0);
  }
}

TEST_CASE("sample times") {
  FlowConfig cfg;
  cfg.t_end = 20.0;
  const std::vector<double> ts = sample_times(cfg);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == 20.0);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
  // Graded near zero, unit cadence later.
  CHECK(ts[1] < 1e-2);
  CHECK(ts[ts.size() - 2] - ts[ts.size() - 3] == doctest::Approx(cfg.sample_every).epsilon(1e-9));
  CHECK(ts.back() - ts[ts.size() - 2] <= cfg.sample_every * (1 + 1e-9));

  cfg.sample_grading = 0.0;
  cfg.t_end = 1.0;
  const std::vector<double> u = sample_times(cfg);
  CHECK(u.size() == 51);
  CHECK(u[1] == doctest::Approx(0.02));

  cfg.t_end = 0.0;
  CHECK(sample_times(cfg).size() == 1);
}

TEST_CASE("gauge selection") {
  const BackgroundPtr reg = make_background({2, 2, 64}), fb = make_background({2, 1, 64});
  FlowConfig cfg;
  CHECK_FALSE(gauge_enabled(cfg, *reg));
  CHECK(gauge_enabled(cfg, *fb));
  cfg.gauge = GaugeMode::None;
  CHECK_FALSE(gauge_enabled(cfg, *fb));
  cfg.gauge = GaugeMode::Soliton;
  CHECK(gauge_enabled(cfg, *reg));
}

TEST_CASE("flow configuration validation") {
  auto bad = [](auto mutate) {
    FlowConfig c;
    mutate(c);
    return c;
  };
  CHECK_NOTHROW(FlowConfig{}.validate());
  CHECK_THROWS_AS(bad([](FlowConfig& c) { c.t_end = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](FlowConfig& c) { c.dt_min = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](FlowConfig& c) { c.dt_init = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](FlowConfig& c) { c.rtol = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](FlowConfig& c) { c.sample_every = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](FlowConfig& c) { c.r2_min = 1.0; }).validate(), ConfigError);

  const BackgroundPtr bg = make_background({2, 2, 64});
  const Field wild = Field::from_function(bg->grid, [](double y) { return 5 * y; });
  CHECK_THROWS_AS(integrate_flow(wild, bg), InadmissibleError);
  const BackgroundPtr other = make_background({2, 2, 32});
  CHECK_THROWS_AS(integrate_flow(Field::zeros(other->grid), bg), UsageError);
}

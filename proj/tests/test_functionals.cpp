#include "fixtures.hpp"
#include "srf/errors.hpp"
#include "srf/functionals.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace srf;

namespace {

Field random_potential(const GridPtr& g, std::mt19937_64& rng, double amp = 0.1) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd c(7);
  c[0] = unit(rng);
  for (int k = 1; k < 7; ++k) c[k] = amp * unit(rng) / (0.5 * k * (k + 1));
  return from_legendre(g, c);
}

Field random_smooth(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd c(9);
  for (int k = 0; k < 9; ++k) c[k] = unit(rng) / (1.0 + k);
  return from_legendre(g, c);
}

Field legendre_mode(const GridPtr& g, int k) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
  c[k] = 1.0;
  return from_legendre(g, c);
}

}  // namespace

TEST_CASE("round state functionals vanish") {
  const BackgroundPtr bg = make_background({2, 2, 128});
  const MetricState s = validate_state(Field::zeros(bg->grid), bg);
  const DiagnosticsRow r = diagnostics(s, {});
  CHECK(r.Y == 0.0);
  CHECK(r.W == 0.0);
  CHECK(r.Z == 0.0);
  CHECK(r.a == 0.0);
  CHECK(r.fut == 0.0);
  CHECK(r.mabuchi == 0.0);
  CHECK(r.vol == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("W at leading order for u = eps P1") {
  const BackgroundPtr bg = make_background({2, 2, 128});
  for (double eps : {1e-2, 1e-3}) {
    MetricState s = validate_state(Field::zeros(bg->grid), bg);
    s.u = eps * legendre_mode(bg->grid, 1);
    const StateFunctionals f = state_functionals(s);
    CHECK(std::abs(f.W - eps * eps / 3.0) < 10 * eps * eps * eps);
  }
}

TEST_CASE("Z matches the time derivative of a") {
  // Differenced along short flow steps; across samples the cadence truncation
  // h^2 a'''/6 would dominate.
  FlowConfig cfg;
  cfg.rtol = 1e3;
  for (auto sl : {std::pair{2.0, 2.0}, std::pair{2.0, 1.0}}) {
    const BackgroundPtr bg = make_background({sl.first, sl.second, 128});
    for (double amp : {0.3, 0.05}) {
      const MetricState s0 = validate_state(fixtures::p2(bg->grid, amp), bg);
      const double h = 1e-5;
      const MetricState s1 = step(s0, h, cfg), s2 = step(s1, h, cfg);
      const double fd =
          (-3.0 * state_functionals(s0).a + 4.0 * state_functionals(s1).a - state_functionals(s2).a) / (2.0 * h);
      const double Z = state_functionals(s0).Z;
      CHECK(std::abs(fd - Z) < 1e-4 * std::abs(Z));
    }
  }
}

TEST_CASE("a is non-positive and the Mabuchi energy non-increasing") {
  for (const char* which : {"perturbed", "football"}) {
    const Trajectory& tr = fixtures::run(which, 2.0);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      CHECK(tr.rows[i].a <= 0.0);
      if (i) CHECK(tr.rows[i].mabuchi <= tr.rows[i - 1].mabuchi);
    }
  }
}

TEST_CASE("Futaki invariant") {
  std::mt19937_64 rng(21);
  const BackgroundPtr reg = make_background({2, 2, 128});
  for (int trial = 0; trial < 3; ++trial) {
    const MetricState s = validate_state(random_potential(reg->grid, rng), reg);
    for (auto m : {FutakiMethod::GradientPairing, FutakiMethod::CurvatureWeighted, FutakiMethod::ClosedForm})
      CHECK(std::abs(futaki(s, m)) < 1e-8);
  }
  const BackgroundPtr fb = make_background({2, 1, 128});
  double lo = 1e9, hi = -1e9;
  for (int trial = 0; trial < 5; ++trial) {
    const MetricState s = validate_state(random_potential(fb->grid, rng), fb);
    CHECK(futaki(s, FutakiMethod::ClosedForm) == -0.5);
    for (auto m : {FutakiMethod::GradientPairing, FutakiMethod::CurvatureWeighted}) {
      const double f = futaki(s, m);
      CHECK(std::abs(f + 0.5) < 1e-6);
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
  }
  CHECK(hi - lo < 1e-6);
}

TEST_CASE("integration by parts behind the curvature-weighted Futaki") {
  std::mt19937_64 rng(4);
  const BackgroundPtr fb = make_background({2, 1, 128});
  for (int trial = 0; trial < 5; ++trial) {
    const MetricState s = validate_state(random_potential(fb->grid, rng), fb);
    CHECK(std::abs(futaki_ibp_residual(random_smooth(fb->grid, rng), s)) < 1e-8);
  }
}

TEST_CASE("Bochner-Kodaira identity") {
  const BackgroundPtr reg = make_background({2, 2, 128});
  const MetricState round = validate_state(Field::zeros(reg->grid), reg);
  CHECK(bochner_kodaira_residual(Field::constant(reg->grid, 2.0), round) < 1e-8);
  CHECK(bochner_kodaira_residual(legendre_mode(reg->grid, 1), round) < 1e-8);

  std::mt19937_64 rng(8);
  for (auto slopes : {std::pair{2.0, 2.0}, std::pair{2.0, 1.0}, std::pair{1.0, 3.0}}) {
    const BackgroundPtr bg = make_background({slopes.first, slopes.second, 128});
    for (int trial = 0; trial < 3; ++trial) {
      const MetricState s = validate_state(random_potential(bg->grid, rng, 0.05), bg);
      CHECK(bochner_kodaira_residual(random_smooth(bg->grid, rng), s) < 1e-6);
    }
  }
}

TEST_CASE("Y evolution identity") {
  const Trajectory& round = fixtures::run("round", 1.0);
  for (std::size_t i = 1; i + 1 < round.size(); i += 7) CHECK(y_evolution_residual(round, i) == 0.0);
  const Trajectory& tr = fixtures::run("perturbed", 4.0);
  CHECK(y_evolution_residual(tr, tr.size() / 2) < 5e-3);
  CHECK_THROWS_AS(y_evolution_residual(tr, 0), UsageError);
}

TEST_CASE("Poincare inequality") {
  const BackgroundPtr reg = make_background({2, 2, 128});
  const MetricState round = validate_state(Field::zeros(reg->grid), reg);
  // Equality in the eigenvalue-1 sector fixes the gradient convention.
  CHECK(std::abs(poincare_slack(legendre_mode(reg->grid, 1), round)) < 1e-13);
  CHECK(poincare_slack(legendre_mode(reg->grid, 2), round) > 0.1);
  std::mt19937_64 rng(2);
  const BackgroundPtr fb = make_background({2, 1, 128});
  for (int trial = 0; trial < 5; ++trial) {
    const MetricState s = validate_state(random_potential(fb->grid, rng), fb);
    for (int j = 0; j < 20; ++j) CHECK(poincare_slack(random_smooth(fb->grid, rng), s) >= -1e-10);
  }
}

TEST_CASE("energy functionals") {
  const BackgroundPtr bg = make_background({2, 1, 128});
  std::mt19937_64 rng(6);
  const MetricState ref = validate_state(random_potential(bg->grid, rng), bg);

  const EnergyReport zero = energy_functionals(Field::zeros(bg->grid), ref);
  CHECK(zero.I == 0.0);
  CHECK(zero.J == 0.0);
  CHECK(zero.L == 0.0);
  CHECK(zero.M == 0.0);

  const EnergyReport c = energy_functionals(Field::constant(bg->grid, 0.7), ref);
  CHECK(std::abs(c.I) < 1e-13);
  CHECK(std::abs(c.J) < 1e-13);
  CHECK(c.L == doctest::Approx(0.7).epsilon(1e-13));

  for (int trial = 0; trial < 10; ++trial) {
    const Field psi = random_potential(bg->grid, rng, 0.05);
    const EnergyReport e = energy_functionals(psi, ref);
    CHECK(e.I - e.J >= 0.0);
    CHECK(e.L == doctest::Approx(aubin_yau_L(psi, ref)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(energy_functionals(Field::zeros(bg->grid), ref, 8), ConfigError);
  // A path through inadmissible metrics names the failure.
  const Field wild = 5.0 * Field::from_function(bg->grid, [](double y) { return y; });
  CHECK_THROWS_AS(energy_functionals(wild, ref), InadmissibleError);
}

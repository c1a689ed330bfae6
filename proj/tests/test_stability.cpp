#include "fixtures.hpp"
#include "srf/errors.hpp"
#include "srf/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace srf;

TEST_CASE("operator pencil") {
  const BackgroundPtr bg = make_background({2, 1, 64});
  const MetricState s = validate_state(fixtures::p2(bg->grid, 0.1), bg);
  const Pencil p = assemble_L(s);
  CHECK((p.A - p.A.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.B.minCoeff() > 0.0);
  // Constants span the kernel.
  CHECK((p.A * Eigen::VectorXd::Ones(64)).cwiseAbs().maxCoeff() < 1e-10 * p.A.cwiseAbs().maxCoeff());

  // Rayleigh quotient of P1 on the round sphere equals kappa.
  const BackgroundPtr reg = make_background({2, 2, 64});
  const MetricState round = validate_state(Field::zeros(reg->grid), reg);
  const Pencil q = assemble_L(round);
  const Eigen::VectorXd x = reg->grid->nodes();
  CHECK(x.dot(q.A * x) / x.dot(q.B.asDiagonal() * x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("round spectrum") {
  const BackgroundPtr bg = make_background({2, 2, 128});
  const MetricState s = validate_state(Field::zeros(bg->grid), bg);
  const SpectrumReport r = eigen_spectrum(s, 8);
  const std::vector<double> expect{1, 3, 6, 10, 15, 21, 28, 36};
  REQUIRE(r.eigenvalues.size() == 8);
  for (int k = 0; k < 8; ++k) CHECK(std::abs(r.eigenvalues[k] - expect[k]) < 1e-6);
  CHECK(r.dim_hol == 1);
  CHECK(r.nu == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.lambda_lo == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.lambda_hi == doctest::Approx(2.0).epsilon(1e-10));
  REQUIRE(r.clusters.size() == 8);
  CHECK(r.clusters[0].multiplicity == 1);

  const BackgroundPtr coarse = make_background({2, 2, 64});
  const SpectrumReport c = eigen_spectrum(validate_state(Field::zeros(coarse->grid), coarse), 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(c.eigenvalues[k] - r.eigenvalues[k]) < 1e-8);

  CHECK_THROWS_AS(eigen_spectrum(s, 0), UsageError);
  CHECK_THROWS_AS(eigen_spectrum(s, 33), UsageError);
}

TEST_CASE("spectral gap interval brackets nu - 1") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (auto sl : {std::pair{2.0, 2.0}, std::pair{2.0, 1.0}}) {
    const BackgroundPtr bg = make_background({sl.first, sl.second, 128});
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(5);
      for (int k = 2; k < 5; ++k) c[k] = 0.05 * unit(rng);
      const SpectrumReport r = eigen_spectrum(validate_state(from_legendre(bg->grid, c), bg), 4);
      CHECK(r.lambda_lo <= r.nu - 1.0);
      CHECK(r.nu - 1.0 <= r.lambda_hi);
    }
  }
}

TEST_CASE("decay fit") {
  std::vector<double> t, v;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    v.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const DecayFit f = fit_decay_rate(t, v);
  CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.t_hi == doctest::Approx(10.0));

  // The floor truncates the leading run.
  const DecayFit g = fit_decay_rate(t, v, 3.0 * std::exp(-10.0));
  CHECK(g.t_hi < 5.0 + 1e-9);
  CHECK(g.rate == doctest::Approx(2.0).epsilon(1e-12));

  const std::vector<double> zeros(t.size(), 0.0);
  CHECK_THROWS_AS(fit_decay_rate(t, zeros), FitUnavailable);
  CHECK_THROWS_AS(fit_decay_rate(std::span(t).first(5), std::span(v).first(4)), UsageError);
}

TEST_CASE("condition flags") {
  const Trajectory& round = fixtures::run("round", 1.0);
  const ConditionFlags r = condition_flags(round.rows);
  CHECK(r.F);
  CHECK(r.T);
  CHECK(r.C_proxy);
  CHECK(r.M_proxy);
  CHECK(r.min_lambda_lo == doctest::Approx(2.0).epsilon(1e-8));

  const Trajectory& fb = fixtures::run("football", 2.0);
  const ConditionFlags f = condition_flags(fb.rows);
  CHECK_FALSE(f.F);
  CHECK(f.max_abs_fut == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(f.C_proxy);

  // Synthetic rows exercise each branch.
  std::vector<DiagnosticsRow> rows(30);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].t = static_cast<double>(i);
    rows[i].dim_hol = 1;
    rows[i].lambda_lo = 0.5;
    rows[i].mabuchi = -1.0;
  }
  CHECK(condition_flags(rows).M_proxy);
  CHECK(condition_flags(rows).T);
  rows.back().mabuchi = -1.1;
  CHECK_FALSE(condition_flags(rows).M_proxy);
  rows[3].lambda_lo = 0.05;
  CHECK_FALSE(condition_flags(rows).T);
  rows[4].lambda_lo = std::nan("");
  CHECK(condition_flags(rows).min_lambda_lo == -1.0);
  rows[5].dim_hol = 2;
  CHECK_FALSE(condition_flags(rows).C_proxy);
  rows[6].dim_hol = 0;
  CHECK_THROWS_AS(condition_flags(rows), UsageError);
  CHECK_THROWS_AS(condition_flags(std::span<const DiagnosticsRow>{}), UsageError);
}

TEST_CASE("Shi monitor") {
  const Trajectory& round = fixtures::run("round", 1.0);
  const ShiMonitor m = shi_monitor(round);
  CHECK(m.sup_m1 < 1e-10);
  CHECK(m.sup_m2 < 1e-10);
  CHECK(m.K == doctest::Approx(1.0).epsilon(1e-12));

  // The monitor is a property of the continuum flow, not the grid.
  const ShiMonitor a = shi_monitor(fixtures::run("perturbed", 1.0, 64));
  const ShiMonitor b = shi_monitor(fixtures::run("perturbed", 1.0, 128));
  CHECK(a.sup_m1 > 0.0);
  CHECK(std::abs(a.sup_m1 / b.sup_m1 - 1.0) < 0.2);
  CHECK(std::abs(a.sup_m2 / b.sup_m2 - 1.0) < 0.2);

  const std::vector<CurvatureSample> none;
  CHECK(shi_monitor(none).sup_m1 == 0.0);
}

TEST_CASE("equivalence monitor") {
  const EquivalenceMonitor round = equivalence_monitor(fixtures::run("round", 1.0));
  CHECK(round.integral == 0.0);
  CHECK(round.log_ratio == 0.0);

  const EquivalenceMonitor p = equivalence_monitor(fixtures::run("perturbed", 4.0));
  CHECK(p.log_ratio > 0.0);
  CHECK(p.log_ratio <= p.integral + 1e-3);
  for (std::size_t i = 1; i < p.cumulative.size(); ++i) CHECK(p.cumulative[i] >= p.cumulative[i - 1]);

  const EquivalenceMonitor f = equivalence_monitor(fixtures::run("football", 2.0));
  CHECK(std::isfinite(f.integral));
  CHECK(std::isfinite(f.log_ratio));
}

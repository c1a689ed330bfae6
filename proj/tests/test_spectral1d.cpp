#include "srf/errors.hpp"
#include "srf/spectral1d.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace srf;

TEST_CASE("two-point rule from the unchecked constructor") {
  const GridPtr g = make_grid_unchecked(2);
  CHECK(g->nodes()[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g->nodes()[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g->weights()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g->weights()[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("grid size gate") {
  CHECK_THROWS_AS(make_grid(7), ConfigError);
  CHECK_NOTHROW(make_grid(8));
}

TEST_CASE("moments") {
  for (int n : {2, 3, 8, 64, 128}) {
    const GridPtr g = make_grid_unchecked(n);
    CHECK(integrate(Field::from_function(g, [](double x) { return x * x; })) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(integrate(Field::from_function(g, [](double x) { return x; }))) < 1e-15);
  }
  const GridPtr g = make_grid(64);
  CHECK(integrate(Field::constant(g, 1.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(integrate(Field::from_function(g, [](double x) { return x * x * x; }))) < 1e-15);
  CHECK(integrate(Field::from_function(g, [](double x) { return 1 - x * x; })) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("differentiation") {
  const GridPtr g = make_grid(32);
  const Field x = Field::from_function(g, [](double y) { return y; });
  CHECK((differentiate(x) - 1.0).max_abs() < 1e-12);
  CHECK((differentiate(x.times(x)) - 2.0 * x).max_abs() < 1e-12);

  const GridPtr g64 = make_grid(64);
  const Field s = Field::from_function(g64, [](double y) { return std::sin(3 * y); });
  const Field ds = Field::from_function(g64, [](double y) { return 3 * std::cos(3 * y); });
  CHECK((differentiate(s) - ds).max_abs() < 1e-10);

  CHECK_THROWS_AS(differentiate(x) + Field::zeros(g64), UsageError);
}

TEST_CASE("integration by parts on random polynomial pairs") {
  const int n = 64;
  const GridPtr g = make_grid(n);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n / 2), b = Eigen::VectorXd::Zero(n / 2);
    for (int k = 0; k < n / 2; ++k) {
      a[k] = unit(rng);
      b[k] = unit(rng);
    }
    const Field f = from_legendre(g, a), h = from_legendre(g, b);
    // P_k(+-1) = (+-1)^k
    double f1 = 0, fm = 0, h1 = 0, hm = 0;
    for (int k = 0; k < n / 2; ++k) {
      f1 += a[k];
      h1 += b[k];
      fm += (k % 2 ? -1 : 1) * a[k];
      hm += (k % 2 ? -1 : 1) * b[k];
    }
    const double lhs = integrate(differentiate(f).times(h)) + integrate(f.times(differentiate(h)));
    CHECK(std::abs(lhs - (f1 * h1 - fm * hm)) < 1e-10);
  }
}

TEST_CASE("modal round trip") {
  const GridPtr g = make_grid(128);
  const Field f = Field::from_function(g, [](double y) { return std::exp(y) * std::cos(5 * y); });
  CHECK((from_legendre(g, to_legendre(f)) - f).max_abs() < 1e-12);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c[3] = 1.0;
  const Field p3 = from_legendre(g, c);
  for (int i = 0; i < g->size(); i += 17) CHECK(p3[i] == doctest::Approx(legendre_p(3, g->nodes()[i])).epsilon(1e-14));
}

TEST_CASE("antiderivative and interpolation") {
  const GridPtr g = make_grid(32);
  const Field f = Field::from_function(g, [](double y) { return std::cos(y); });
  const Field F = antiderivative(f);
  const Field exact = Field::from_function(g, [](double y) { return std::sin(y) + std::sin(1.0); });
  CHECK((F - exact).max_abs() < 1e-13);
  CHECK(interpolate(f, 0.3) == doctest::Approx(std::cos(0.3)).epsilon(1e-13));
  CHECK(interpolate(f, 1.0) == doctest::Approx(std::cos(1.0)).epsilon(1e-13));
}

TEST_CASE("Chebyshev-weight quadrature") {
  const GridPtr g = make_grid(64);
  CHECK(integrate_chebyshev_weight(Field::constant(g, 1.0)) == doctest::Approx(M_PI).epsilon(1e-14));
  // int y^2 / sqrt(1 - y^2) = pi / 2
  CHECK(integrate_chebyshev_weight(Field::from_function(g, [](double y) { return y * y; })) ==
        doctest::Approx(M_PI / 2).epsilon(1e-14));
}

TEST_CASE("fields reject non-finite values") {
  const GridPtr g = make_grid(8);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
  v[3] = std::nan("");
  CHECK_THROWS_AS(Field(g, v), NumericError);
}

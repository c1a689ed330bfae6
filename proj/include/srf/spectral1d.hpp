#pragma once

// Gauss-Legendre collocation on the moment interval [-1, 1]: nodes, quadrature,
// barycentric differentiation/interpolation and Legendre transforms.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace srf {

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

class Grid {
 public:
  static constexpr int kMinSize = 8;
  static constexpr int kDefaultSize = 128;

  int size() const { return n_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& bary_weights() const { return bary_; }

  /// Nodal differentiation matrix; exact on polynomials of degree < N.
  const Eigen::MatrixXd& diff() const { return diff_; }
  /// diff() squared, cached.
  const Eigen::MatrixXd& diff2() const { return diff2_; }
  /// Maps nodal values to nodal values of the antiderivative vanishing at -1.
  const Eigen::MatrixXd& antiderivative() const { return antider_; }
  /// Vandermonde V(i, k) = P_k(x_i).
  const Eigen::MatrixXd& legendre_vandermonde() const { return vander_; }

  /// Row vector r such that r * f interpolates f at x.
  Eigen::RowVectorXd interpolation_row(double x) const;

 private:
  friend GridPtr make_grid(int n);
  friend GridPtr make_grid_unchecked(int n);
  explicit Grid(int n);

  int n_;
  Eigen::VectorXd nodes_, weights_, bary_;
  Eigen::MatrixXd diff_, diff2_, antider_, vander_;
};

/// Gauss-Legendre grid with N >= 8 nodes; throws ConfigError otherwise.
GridPtr make_grid(int n);
/// Same construction without the size gate (tests of tiny rules only).
GridPtr make_grid_unchecked(int n);

/// Nodal values bound to one grid. Value semantic; all values finite.
class Field {
 public:
  Field(GridPtr grid, Eigen::VectorXd values);

  static Field zeros(const GridPtr& grid);
  static Field constant(const GridPtr& grid, double c);
  static Field from_function(const GridPtr& grid, const std::function<double(double)>& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const { return v_; }
  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[i]; }

  double max_abs() const { return v_.cwiseAbs().maxCoeff(); }
  double min() const { return v_.minCoeff(); }
  double max() const { return v_.maxCoeff(); }

  Field map(const std::function<double(double)>& f) const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }
  Field operator+(double c) const;
  Field operator-(double c) const { return *this + (-c); }

  /// Pointwise product / quotient.
  Field times(const Field& o) const;
  Field divided_by(const Field& o) const;

 private:
  struct Unchecked {};
  Field(GridPtr grid, Eigen::VectorXd values, Unchecked);
  friend Field unchecked_field(GridPtr, Eigen::VectorXd);

  GridPtr grid_;
  Eigen::VectorXd v_;
};

/// Builds a field without the finiteness scan; for hot internal paths.
Field unchecked_field(GridPtr grid, Eigen::VectorXd values);

/// Throws UsageError unless both fields live on the same grid object.
void require_same_grid(const Field& a, const Field& b);

Field differentiate(const Field& f);
double integrate(const Field& f);
/// Antiderivative F(x) = int_{-1}^{x} f.
Field antiderivative(const Field& f);
/// Barycentric interpolation of the nodal polynomial at arbitrary points.
double interpolate(const Field& f, double x);
std::vector<double> interpolate(const Field& f, std::span<const double> xs);

/// Legendre coefficients a_k with f = sum a_k P_k at the nodes.
Eigen::VectorXd to_legendre(const Field& f);
Field from_legendre(const GridPtr& grid, const Eigen::VectorXd& coeffs);

/// P_k(x) by the three-term recurrence.
double legendre_p(int k, double x);

/// Gauss-Chebyshev rule for int_{-1}^{1} g(y) / sqrt(1 - y^2) dy with g given
/// by its nodal interpolant.
double integrate_chebyshev_weight(const Field& g, int points = 0);

}  // namespace srf

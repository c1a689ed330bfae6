#include "srf/spectral1d.hpp"

#include "srf/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace srf {

namespace {

// P_n(x) and P_n'(x).
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

double legendre_p(int k, double x) {
  if (k == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= k; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

Grid::Grid(int n) : n_(n) {
  nodes_.resize(n);
  weights_.resize(n);
  // Newton on P_n for the upper half, mirrored so the rule is exactly symmetric.
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre_with_derivative(n, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes_[n - 1 - i] = x;
    nodes_[i] = -x;
    weights_[n - 1 - i] = w;
    weights_[i] = w;
  }
  if (n % 2 == 1) {
    const auto [p, dp] = legendre_with_derivative(n, 0.0);
    (void)p;
    nodes_[half] = 0.0;
    weights_[half] = 2.0 / (dp * dp);
  }

  bary_.resize(n);
  for (int j = 0; j < n; ++j) {
    const double s = (j % 2 == 0) ? 1.0 : -1.0;
    bary_[j] = s * std::sqrt((1.0 - nodes_[j] * nodes_[j]) * weights_[j]);
  }

  diff_.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = (bary_[j] / bary_[i]) / (nodes_[i] - nodes_[j]);
      diff_(i, j) = d;
      row += d;
    }
    diff_(i, i) = -row;
  }
  diff2_ = diff_ * diff_;

  vander_.resize(n, n);
  Eigen::MatrixXd integrated(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = nodes_[i];
    // Values P_0..P_n at x; P_n vanishes at the nodes up to rounding.
    std::vector<double> p(n + 1);
    p[0] = 1.0;
    if (n >= 1) p[1] = x;
    for (int k = 2; k <= n; ++k) p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
    for (int k = 0; k < n; ++k) vander_(i, k) = p[k];
    integrated(i, 0) = x + 1.0;
    for (int k = 1; k < n; ++k) integrated(i, k) = (p[k + 1] - p[k - 1]) / (2.0 * k + 1.0);
  }
  // Discrete forward transform: a_k = (2k+1)/2 sum_i w_i P_k(x_i) f_i.
  Eigen::MatrixXd forward = vander_.transpose() * weights_.asDiagonal();
  for (int k = 0; k < n; ++k) forward.row(k) *= (2.0 * k + 1.0) / 2.0;
  antider_ = integrated * forward;
}

Eigen::RowVectorXd Grid::interpolation_row(double x) const {
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_);
  double denom = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double dx = x - nodes_[j];
    if (dx == 0.0) {
      r.setZero();
      r[j] = 1.0;
      return r;
    }
    r[j] = bary_[j] / dx;
    denom += r[j];
  }
  return r / denom;
}

GridPtr make_grid_unchecked(int n) {
  if (n < 1) throw ConfigError("grid size must be positive, got " + std::to_string(n));
  return GridPtr(new Grid(n));
}

GridPtr make_grid(int n) {
  if (n < Grid::kMinSize)
    throw ConfigError("grid size must be at least " + std::to_string(Grid::kMinSize) + ", got " +
                      std::to_string(n));
  return make_grid_unchecked(n);
}

// ---------------------------------------------------------------------------

Field::Field(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), v_(std::move(values)) {
  if (!grid_) throw UsageError("field without a grid");
  if (v_.size() != grid_->size())
    throw UsageError("field length " + std::to_string(v_.size()) + " does not match grid size " +
                     std::to_string(grid_->size()));
  if (!v_.allFinite()) throw NumericError("field contains non-finite values");
}

Field::Field(GridPtr grid, Eigen::VectorXd values, Unchecked)
    : grid_(std::move(grid)), v_(std::move(values)) {}

Field unchecked_field(GridPtr g, Eigen::VectorXd v) {
  return Field(std::move(g), std::move(v), Field::Unchecked{});
}

Field Field::zeros(const GridPtr& grid) { return Field(grid, Eigen::VectorXd::Zero(grid->size())); }

Field Field::constant(const GridPtr& grid, double c) {
  return Field(grid, Eigen::VectorXd::Constant(grid->size(), c));
}

Field Field::from_function(const GridPtr& grid, const std::function<double(double)>& f) {
  Eigen::VectorXd v(grid->size());
  for (int i = 0; i < grid->size(); ++i) v[i] = f(grid->nodes()[i]);
  return Field(grid, std::move(v));
}

Field Field::map(const std::function<double(double)>& f) const {
  Eigen::VectorXd out(v_.size());
  for (Eigen::Index i = 0; i < v_.size(); ++i) out[i] = f(v_[i]);
  return Field(grid_, std::move(out));
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() != b.grid_ptr()) throw UsageError("fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  v_ += o.v_;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  v_ -= o.v_;
  return *this;
}

Field& Field::operator*=(double s) {
  v_ *= s;
  return *this;
}

Field Field::operator+(double c) const {
  return unchecked_field(grid_, (v_.array() + c).matrix());
}

Field Field::times(const Field& o) const {
  require_same_grid(*this, o);
  return unchecked_field(grid_, v_.cwiseProduct(o.v_));
}

Field Field::divided_by(const Field& o) const {
  require_same_grid(*this, o);
  return Field(grid_, v_.cwiseQuotient(o.v_));
}

Field differentiate(const Field& f) { return unchecked_field(f.grid_ptr(), f.grid().diff() * f.values()); }

double integrate(const Field& f) { return f.grid().weights().dot(f.values()); }

Field antiderivative(const Field& f) {
  return unchecked_field(f.grid_ptr(), f.grid().antiderivative() * f.values());
}

double interpolate(const Field& f, double x) { return f.grid().interpolation_row(x).dot(f.values()); }

std::vector<double> interpolate(const Field& f, std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(interpolate(f, x));
  return out;
}

Eigen::VectorXd to_legendre(const Field& f) {
  const Grid& g = f.grid();
  Eigen::VectorXd a = g.legendre_vandermonde().transpose() * g.weights().cwiseProduct(f.values());
  for (int k = 0; k < g.size(); ++k) a[k] *= (2.0 * k + 1.0) / 2.0;
  return a;
}

Field from_legendre(const GridPtr& grid, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() > grid->size()) throw UsageError("more Legendre coefficients than grid nodes");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(grid->size());
  full.head(coeffs.size()) = coeffs;
  return Field(grid, grid->legendre_vandermonde() * full);
}

double integrate_chebyshev_weight(const Field& g, int points) {
  const int m = points > 0 ? points : 2 * g.size();
  double sum = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double y = std::cos((2.0 * k - 1.0) * std::numbers::pi / (2.0 * m));
    sum += interpolate(g, y);
  }
  return sum * std::numbers::pi / m;
}

}  // namespace srf

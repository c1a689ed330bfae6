#include "srf/geometry.hpp"

#include "srf/errors.hpp"

#include <cmath>
#include <sstream>

namespace srf {

GeometryConfig GeometryConfig::from_weights(double a, double b, int n) {
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("orbifold weights must be positive");
  return GeometryConfig{2.0 / b, 2.0 / a, n};
}

void GeometryConfig::validate() const {
  if (!(p_minus > 0.0) || !(p_plus > 0.0) || !std::isfinite(p_minus) || !std::isfinite(p_plus)) {
    std::ostringstream os;
    os << "pole slopes must be positive, got (" << p_minus << ", " << p_plus << ")";
    throw ConfigError(os.str());
  }
  if (n < Grid::kMinSize) throw ConfigError("grid size must be at least 8");
}

Field BackgroundGeometry::H0(const Field& f) const {
  if (f.grid_ptr() != grid) throw UsageError("field and background live on different grids");
  return unchecked_field(grid, H * f.values());
}

BackgroundPtr make_background(const GeometryConfig& config) {
  config.validate();
  auto bg = std::make_shared<BackgroundGeometry>(BackgroundGeometry{
      make_grid(config.n), config.p_minus, config.p_plus, config.kappa(),
      Field::zeros(make_grid_unchecked(1)), Field::zeros(make_grid_unchecked(1)),
      Field::zeros(make_grid_unchecked(1)), Field::zeros(make_grid_unchecked(1)),
      Field::zeros(make_grid_unchecked(1)), Eigen::MatrixXd()});
  const GridPtr& g = bg->grid;
  const double pm = config.p_minus, pp = config.p_plus;
  // phi0 = (1 - y^2) q(y), q linear with q(-1) = pm/2, q(1) = pp/2.
  const double qa = bg->kappa;           // (pm + pp) / 4
  const double qb = (pp - pm) / 4.0;
  bg->q = Field::from_function(g, [&](double y) { return qa + qb * y; });
  bg->phi0 = Field::from_function(g, [&](double y) { return (1.0 - y * y) * (qa + qb * y); });
  bg->dphi0 = Field::from_function(g, [&](double y) { return qb - 2.0 * qa * y - 3.0 * qb * y * y; });
  // R0 = -phi0''/2 with phi0'' = -2 qa - 6 qb y.
  bg->R0 = Field::from_function(g, [&](double y) { return qa + 3.0 * qb * y; });

  const Eigen::VectorXd& p0 = bg->phi0.values();
  const Eigen::VectorXd& dp0 = bg->dphi0.values();
  bg->H = 0.5 * (dp0.asDiagonal() * g->diff() + p0.asDiagonal() * g->diff2());

  // phi0 F' = p_minus - phi0' - 2 kappa (y + 1). The numerator vanishes at both
  // poles and factors as -3 qb (1 - y^2), so F' = -3 qb / q.
  if (qb == 0.0) {
    bg->F = Field::zeros(g);
  } else {
    const Field dF = Field::from_function(g, [&](double y) { return -3.0 * qb / (qa + qb * y); });
    Field F = antiderivative(dF);
    const double mass = g->weights().dot(F.values().unaryExpr([](double v) { return std::exp(-v); }));
    F = F + std::log(mass / kVolume);
    bg->F = F;
  }
  return bg;
}

Field density(const Field& phi, const BackgroundGeometry& bg) { return bg.H0(phi) + 1.0; }

namespace {

double dy_mean(const Field& f) { return integrate(f) / f.grid().weights().sum(); }

}  // namespace

MetricState validate_state(const Field& phi, const BackgroundPtr& bg, double eps_pos, double t) {
  if (phi.grid_ptr() != bg->grid) throw UsageError("potential and background live on different grids");
  const GridPtr& g = bg->grid;
  // Constants are invisible to the geometry; drop them before any arithmetic.
  const Field centered = phi - dy_mean(phi);
  const Field dm1 = bg->H0(centered);
  const Field D = dm1 + 1.0;
  Eigen::Index imin = 0;
  const double dmin = D.values().minCoeff(&imin);
  if (!(dmin > eps_pos)) {
    std::ostringstream os;
    os << "inadmissible potential: min D = " << dmin << " at y = " << g->nodes()[imin];
    throw InadmissibleError(os.str(), g->nodes()[imin], dmin);
  }
  const Field logD = dm1.map([](double v) { return std::log1p(v); });

  // Unnormalized potential and its normalizing constant, in expm1/log1p form so
  // nearly-Einstein states keep relative precision.
  const Field ut = bg->kappa * centered + logD - bg->F;
  const Eigen::VectorXd& w = g->weights();
  double excess = 0.0;
  for (int i = 0; i < g->size(); ++i)
    excess += w[i] * (std::expm1(-ut[i]) * D[i] + dm1[i]);
  const double c = std::log1p(excess / w.sum());
  const Field u = ut + c;

  const Field R = (bg->R0 - bg->H0(logD)).divided_by(D);

  const Field dphi = differentiate(centered);
  Field h = Field::from_function(g, [](double y) { return y; }) + 0.5 * bg->phi0.times(dphi);

  return MetricState{bg, phi, D, dm1, logD, u, R, h, t};
}

Field ricci_potential(const Field& phi, const BackgroundPtr& bg) { return validate_state(phi, bg).u; }

Field grad_norm_sq(const Field& f, const MetricState& s) {
  const Field df = differentiate(f);
  return (0.5 * s.bg->phi0.times(df).times(df)).divided_by(s.D);
}

Field laplacian(const Field& f, const MetricState& s) { return s.bg->H0(f).divided_by(s.D); }

Field hessian_norm_sq(const Field& f, const MetricState& s) {
  const Field inner = differentiate(differentiate(f).divided_by(s.D));
  const Field p = s.bg->phi0;
  return 0.25 * p.times(p).times(inner).times(inner);
}

double integrate_dm(const Field& f, const MetricState& s) { return integrate(f.times(s.D)); }

double transverse_diameter(const Field& D, const BackgroundGeometry& bg) {
  // sqrt(D / phi0) = sqrt(D / q) / sqrt(1 - y^2): Chebyshev weight absorbs the poles.
  const Field g = D.divided_by(bg.q).map([](double v) { return std::sqrt(v); });
  return integrate_chebyshev_weight(g);
}

double transverse_diameter(const MetricState& s) { return transverse_diameter(s.D, *s.bg); }

SasakiScalars dhomothety(const SasakiScalars& s, double a) {
  if (!(a > 0.0)) throw ConfigError("D-homothety factor must be positive");
  return SasakiScalars{s.kappa / a, s.metric_scale * a, s.eta_scale * a, s.xi_scale / a};
}

double einstein_normalizing_factor(double c) {
  if (!(c > 0.0)) throw ConfigError("Einstein constant must be positive");
  return c / (2.0 * kComplexDim);
}

double reconstruct_sasaki_curvature(double scalar_curvature, CurvaturePlane plane, double homothety) {
  if (!(homothety > 0.0)) throw ConfigError("D-homothety factor must be positive");
  switch (plane) {
    case CurvaturePlane::TransverseReeb:
      return 1.0;
    case CurvaturePlane::TransverseTransverse:
      // Riemannian transverse sectional curvature 2R, scaled by 1/a, minus the
      // O'Neill torsion term 3.
      return 2.0 * scalar_curvature / homothety - 3.0;
  }
  throw UsageError("unknown curvature plane");
}

double reconstruct_sasaki_curvature(const MetricState& state, int node, CurvaturePlane plane,
                                    double homothety) {
  if (node < 0 || node >= state.R.size()) throw UsageError("node index out of range");
  return reconstruct_sasaki_curvature(state.R[node], plane, homothety);
}

}  // namespace srf

#include "srf/functionals.hpp"

#include "srf/errors.hpp"
#include "srf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace srf {

namespace {

// Quadrature weights of e^{-u} dm / Vol.
Eigen::VectorXd weighted_measure(const MetricState& s) {
  const Eigen::VectorXd& w = s.grid().weights();
  Eigen::VectorXd out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) out[i] = w[i] * s.D[i] * std::exp(-s.u[i]) / kVolume;
  return out;
}

// e^{-u}(1 + u) - 1 <= 0, accurate for small u.
double a_density(double u) {
  if (std::abs(u) > 0.05) return std::exp(-u) * (1.0 + u) - 1.0;
  // sum_{n>=2} (-1)^n (1 - n) u^n / n!
  double term = u * u / 2.0, sum = 0.0;
  for (int n = 2; n <= 12; ++n) {
    sum += (1.0 - n) * term;
    term *= -u / (n + 1);
  }
  return sum;
}

}  // namespace

StateFunctionals state_functionals(const MetricState& s) {
  const Eigen::VectorXd mu = weighted_measure(s);
  const Eigen::VectorXd& u = s.u.values();
  const Eigen::VectorXd du = s.grid().diff() * u;
  const Eigen::VectorXd& w = s.grid().weights();
  const Eigen::VectorXd& p0 = s.bg->phi0.values();

  StateFunctionals f;
  // With int e^-u dm = Vol, a = Vol^-1 int (e^-u (1+u) - 1) dm: nonpositive
  // term by term and free of cancellation as u -> 0.
  double a = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) a += w[i] * s.D[i] * a_density(u[i]);
  f.a = a / kVolume;
  double Y = 0.0, W = 0.0, Z = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double g2 = 0.5 * p0[i] * du[i] * du[i] / s.D[i];
    const double v = u[i] - f.a;
    Y += w[i] * 0.5 * p0[i] * du[i] * du[i];
    W += mu[i] * v * v;
    Z += mu[i] * (g2 - s.bg->kappa * v * v);
  }
  f.Y = Y;
  f.W = W;
  f.Z = Z;
  return f;
}

double mabuchi_increment(const DiagnosticsRow& prev, double t, double Y) {
  return -0.5 * (t - prev.t) * (prev.Y + Y);
}

DiagnosticsRow diagnostics(const MetricState& s, std::span<const DiagnosticsRow> prev) {
  DiagnosticsRow r;
  r.t = s.t;
  const StateFunctionals f = state_functionals(s);
  r.Y = f.Y;
  r.W = f.W;
  r.Z = f.Z;
  r.a = f.a;
  r.vol = integrate(s.D);
  r.gauss_bonnet = integrate_dm(s.R, s);
  r.R_mean = r.gauss_bonnet / r.vol;
  r.R_min = s.R.min();
  r.R_max = s.R.max();
  r.osc_u = s.u.max() - s.u.min();
  r.u_sup = s.u.max_abs();
  r.grad_u_max = std::sqrt(grad_norm_sq(s.u, s).max());
  r.fut = futaki(s, FutakiMethod::ClosedForm);
  r.fut_pairing = futaki(s, FutakiMethod::GradientPairing);
  r.fut_curvature = futaki(s, FutakiMethod::CurvatureWeighted);
  r.diam_T = transverse_diameter(s);
  r.mabuchi = prev.empty() ? 0.0 : prev.back().mabuchi + mabuchi_increment(prev.back(), r.t, r.Y);
  r.ydot_rhs = y_evolution_rhs(s);
  r.dR_max = std::sqrt(grad_norm_sq(s.R, s).max());
  const Field lapR = laplacian(s.R, s);
  r.ddR_max = std::sqrt((hessian_norm_sq(s.R, s) + lapR.times(lapR)).max());
  return r;
}

double futaki(const MetricState& s, FutakiMethod method) {
  switch (method) {
    case FutakiMethod::ClosedForm:
      return s.bg->futaki_closed_form();
    case FutakiMethod::GradientPairing:
      // <dh, du> dm with h' = D: (1/2) phi0 D u' dy.
      return 0.5 * integrate(s.bg->phi0.times(s.D).times(differentiate(s.u)));
    case FutakiMethod::CurvatureWeighted:
      return integrate_dm(s.h.times(s.R - s.bg->kappa), s);
  }
  throw UsageError("unknown Futaki method");
}

double futaki_ibp_residual(const Field& h, const MetricState& s) {
  const double pairing = 0.5 * integrate(s.bg->phi0.times(differentiate(h)).times(differentiate(s.u)));
  return pairing - integrate_dm(h.times(s.R - s.bg->kappa), s);
}

double bochner_kodaira_residual(const Field& f, const MetricState& s) {
  const Field lap = laplacian(f, s);
  const double lhs = integrate_dm(lap.times(lap), s);
  const double hess = integrate_dm(hessian_norm_sq(f, s), s);
  const double curv = integrate_dm(s.R.times(grad_norm_sq(f, s)), s);
  // The L2 floor keeps kernel directions (constants), where every term is
  // round-off, from reading as a relative failure.
  const double scale = std::abs(lhs) + std::abs(hess) + std::abs(curv) + 1e-12 * integrate_dm(f.times(f), s);
  if (scale == 0.0) return 0.0;
  return std::abs(lhs - hess - curv) / scale;
}

double y_evolution_rhs(const MetricState& s) {
  const Field g2 = grad_norm_sq(s.u, s);
  const Field lap = laplacian(s.u, s);
  const double Y = integrate_dm(g2, s);
  return 2.0 * s.bg->kappa * Y - integrate_dm(s.R.times(g2), s) - integrate_dm(lap.times(lap), s) -
         integrate_dm(hessian_norm_sq(s.u, s), s);
}

double y_evolution_residual(const Trajectory& traj, std::size_t i) {
  if (i == 0 || i + 1 >= traj.rows.size()) throw UsageError("Y residual needs an interior sample");
  const DiagnosticsRow& lo = traj.rows[i - 1];
  const DiagnosticsRow& mid = traj.rows[i];
  const DiagnosticsRow& hi = traj.rows[i + 1];
  const double hm = mid.t - lo.t, hp = hi.t - mid.t;
  // Three-point central difference on a nonuniform grid (second order).
  const double fd = (hm * hm * (hi.Y - mid.Y) + hp * hp * (mid.Y - lo.Y)) / (hm * hp * (hm + hp));
  return std::abs(fd - mid.ydot_rhs) / std::max({std::abs(fd), mid.Y, 1e-14});
}

double poincare_slack(const Field& f, const MetricState& s) {
  const Eigen::VectorXd mu = weighted_measure(s);
  const double m = mu.dot(f.values());
  const Field g2 = grad_norm_sq(f, s);
  double var = 0.0, grad = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double v = f[i] - m;
    var += mu[i] * v * v;
    grad += mu[i] * g2[i];
  }
  return grad / s.bg->kappa - var;
}

double aubin_yau_L(const Field& psi, const MetricState& ref) {
  return integrate(psi.times(ref.D + 0.5 * ref.bg->H0(psi))) / kVolume;
}

EnergyReport energy_functionals(const Field& psi, const MetricState& ref, int steps) {
  if (steps < 16) throw ConfigError("energy path needs at least 16 quadrature steps");
  require_same_grid(psi, ref.D);
  const BackgroundGeometry& bg = *ref.bg;
  const Field Hpsi = bg.H0(psi);

  EnergyReport e;
  e.I = -integrate(psi.times(Hpsi)) / kVolume;
  e.J = 0.5 * e.I;
  e.L = aubin_yau_L(psi, ref);

  // M = -Vol^-1 int_0^1 int psi (R_s - kappa) D_s dy ds with R_s D_s = R0 - H0[log D_s].
  const GridPtr sq = make_grid_unchecked(steps);
  double M = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double sv = 0.5 * (sq->nodes()[k] + 1.0);
    const Field Ds = ref.D + sv * Hpsi;
    Eigen::Index imin = 0;
    const double dmin = Ds.values().minCoeff(&imin);
    if (!(dmin > 0.0)) {
      std::ostringstream os;
      os << "energy path leaves the admissible set at s = " << sv << " (min D = " << dmin << ")";
      throw InadmissibleError(os.str(), ref.grid().nodes()[imin], dmin);
    }
    const Field logDs = Ds.map([](double v) { return std::log(v); });
    const Field integrand = psi.times(bg.R0 - bg.H0(logDs) - bg.kappa * Ds);
    M += 0.5 * sq->weights()[k] * integrate(integrand);
  }
  e.M = -M / kVolume;
  return e;
}

}  // namespace srf

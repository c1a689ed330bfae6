#include "srf/stability.hpp"

#include "srf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace srf {

Pencil assemble_L(const MetricState& s) {
  const Grid& g = s.grid();
  const int n = g.size();
  Eigen::VectorXd a(n), b(n);
  for (int i = 0; i < n; ++i) {
    const double e = std::exp(-s.u[i]);
    a[i] = 0.5 * g.weights()[i] * s.bg->phi0[i] * e;
    b[i] = g.weights()[i] * e * s.D[i];
  }
  Pencil p;
  p.A = g.diff().transpose() * a.asDiagonal() * g.diff();
  p.A = (0.5 * (p.A + p.A.transpose())).eval();
  p.B = b;
  return p;
}

SpectrumReport eigen_spectrum(const MetricState& s, int k, double gap_tol) {
  const int n = s.grid().size();
  if (k < 1 || k > n / 4) {
    std::ostringstream os;
    os << "requested " << k << " eigenvalues; allowed range is [1, " << n / 4 << "]";
    throw UsageError(os.str());
  }
  const Pencil p = assemble_L(s);
  const Eigen::VectorXd bs = p.B.cwiseSqrt();
  const Eigen::VectorXd bis = bs.cwiseInverse();
  Eigen::MatrixXd C = bis.asDiagonal() * p.A * bis.asDiagonal();

  // Constants map to B^{1/2} 1; reflect it onto e_0 and drop that row/column.
  Eigen::VectorXd v = bs / bs.norm();
  v[0] += (v[0] >= 0.0 ? 1.0 : -1.0);
  v /= v.norm();
  const Eigen::VectorXd Cv = C * v;
  const double vCv = v.dot(Cv);
  // H C H with H = I - 2 v v^T.
  C += -2.0 * (Cv * v.transpose() + v * Cv.transpose()) + 4.0 * vCv * (v * v.transpose());
  const Eigen::MatrixXd block = C.bottomRightCorner(n - 1, n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "symmetric eigensolver failed (mass ratio " << p.B.maxCoeff() / p.B.minCoeff() << ")";
    throw NumericError(os.str());
  }
  const double kappa = s.bg->kappa;
  std::vector<double> all(es.eigenvalues().data(), es.eigenvalues().data() + n - 1);
  for (double& x : all) x /= kappa;

  SpectrumReport r;
  r.osc_u = s.u.max() - s.u.min();
  r.eigenvalues.assign(all.begin(), all.begin() + k);
  for (double x : r.eigenvalues) {
    if (!r.clusters.empty() && x - r.clusters.back().value <= gap_tol)
      ++r.clusters.back().multiplicity;
    else
      r.clusters.push_back({x, 1});
  }
  r.nu = std::numeric_limits<double>::quiet_NaN();
  for (double x : all) {
    if (std::abs(x - 1.0) <= gap_tol) ++r.dim_hol;
    if (std::isnan(r.nu) && x > 1.0 + gap_tol) r.nu = x;
  }
  r.lambda_lo = std::exp(-r.osc_u) * (r.nu - 1.0);
  r.lambda_hi = std::exp(r.osc_u) * (r.nu - 1.0);
  return r;
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> value, double floor) {
  if (t.size() != value.size()) throw UsageError("time and value series differ in length");
  std::size_t n_ok = 0;
  while (n_ok < value.size() && std::isfinite(value[n_ok]) && value[n_ok] > floor && value[n_ok] > 0.0)
    ++n_ok;
  constexpr std::size_t kMinSamples = 10;
  if (n_ok < kMinSamples) {
    std::ostringstream os;
    os << "decay fit needs " << kMinSamples << " positive samples above " << floor << ", found " << n_ok;
    throw FitUnavailable(os.str());
  }
  const std::size_t count = std::max(kMinSamples, n_ok / 3);
  const std::size_t lo = n_ok - count;

  double st = 0.0, sl = 0.0;
  for (std::size_t i = lo; i < n_ok; ++i) {
    st += t[i];
    sl += std::log(value[i]);
  }
  const double mt = st / count, ml = sl / count;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t i = lo; i < n_ok; ++i) {
    const double dt = t[i] - mt, dl = std::log(value[i]) - ml;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  if (stt == 0.0) throw FitUnavailable("decay fit window has zero time extent");
  const double slope = stl / stt;
  double ssr = 0.0;
  for (std::size_t i = lo; i < n_ok; ++i) {
    const double e = std::log(value[i]) - ml - slope * (t[i] - mt);
    ssr += e * e;
  }
  DecayFit f;
  f.rate = -slope;
  f.r2 = sll > 0.0 ? 1.0 - ssr / sll : 0.0;
  f.t_lo = t[lo];
  f.t_hi = t[n_ok - 1];
  f.count = count;
  return f;
}

ConditionFlags condition_flags(std::span<const DiagnosticsRow> rows, double delta_T, double tol_F) {
  if (rows.empty()) throw UsageError("condition flags need at least one sample");
  ConditionFlags c;
  c.min_lambda_lo = std::numeric_limits<double>::infinity();
  c.dim_hol_min = std::numeric_limits<int>::max();
  c.dim_hol_max = std::numeric_limits<int>::min();
  double mab_inf = std::numeric_limits<double>::infinity();
  for (const DiagnosticsRow& r : rows) {
    if (r.dim_hol <= 0) throw UsageError("condition flags need per-sample spectra");
    c.max_abs_fut = std::max({c.max_abs_fut, std::abs(r.fut), std::abs(r.fut_pairing), std::abs(r.fut_curvature)});
    c.min_lambda_lo = std::min(c.min_lambda_lo, std::isnan(r.lambda_lo) ? -1.0 : r.lambda_lo);
    c.dim_hol_min = std::min(c.dim_hol_min, r.dim_hol);
    c.dim_hol_max = std::max(c.dim_hol_max, r.dim_hol);
    mab_inf = std::min(mab_inf, r.mabuchi);
  }
  const double t_end = rows.back().t;
  const auto tail = std::find_if(rows.begin(), rows.end(),
                                 [&](const DiagnosticsRow& r) { return r.t >= 2.0 * t_end / 3.0; });
  c.mabuchi_tail = std::abs(rows.back().mabuchi - tail->mabuchi);
  c.M_proxy = std::abs(rows.back().mabuchi - mab_inf) <= kMabuchiFlatTolerance &&
              c.mabuchi_tail <= kMabuchiFlatTolerance;
  c.F = c.max_abs_fut < tol_F;
  c.T = c.min_lambda_lo > delta_T;
  c.C_proxy = c.dim_hol_min == c.dim_hol_max;
  return c;
}

CurvatureSample curvature_sample(const MetricState& s) {
  CurvatureSample c;
  c.t = s.t;
  c.R_abs = s.R.max_abs();
  c.dR = std::sqrt(grad_norm_sq(s.R, s).max());
  const Field lapR = laplacian(s.R, s);
  c.ddR = std::sqrt((hessian_norm_sq(s.R, s) + lapR.times(lapR)).max());
  return c;
}

ShiMonitor shi_monitor(std::span<const CurvatureSample> samples) {
  ShiMonitor m;
  if (samples.empty()) return m;
  for (const CurvatureSample& c : samples)
    if (c.t <= 1.0) m.K = std::max(m.K, c.R_abs);
  const double norm = std::max(std::sqrt(m.K), m.K);
  const double horizon = std::min(1.0, samples.back().t);
  for (const CurvatureSample& c : samples) {
    const double m1 = norm > 0.0 ? std::sqrt(c.t) * c.dR / norm : 0.0;
    const double m2 = norm > 0.0 ? c.t * c.ddR / norm : 0.0;
    m.m1.push_back(m1);
    m.m2.push_back(m2);
    if (c.t > 0.0 && c.t <= horizon) {
      m.sup_m1 = std::max(m.sup_m1, m1);
      m.sup_m2 = std::max(m.sup_m2, m2);
    }
  }
  return m;
}

ShiMonitor shi_monitor(const Trajectory& traj) {
  std::vector<CurvatureSample> cs;
  cs.reserve(traj.rows.size());
  for (const DiagnosticsRow& r : traj.rows)
    cs.push_back({r.t, std::max(std::abs(r.R_min), std::abs(r.R_max)), r.dR_max, r.ddR_max});
  return shi_monitor(cs);
}

EquivalenceMonitor equivalence_monitor(std::span<const Field> logD) {
  EquivalenceMonitor m;
  if (logD.empty()) return m;
  const int n = logD.front().size();
  Eigen::VectorXd lo = logD.front().values(), hi = lo;
  m.cumulative.push_back(0.0);
  for (std::size_t i = 1; i < logD.size(); ++i) {
    const Eigen::VectorXd& cur = logD[i].values();
    m.integral += (cur - logD[i - 1].values()).cwiseAbs().maxCoeff();
    m.cumulative.push_back(m.integral);
    lo = lo.cwiseMin(cur);
    hi = hi.cwiseMax(cur);
  }
  for (int j = 0; j < n; ++j) m.log_ratio = std::max(m.log_ratio, hi[j] - lo[j]);
  return m;
}

EquivalenceMonitor equivalence_monitor(const Trajectory& traj) {
  std::vector<Field> logD;
  logD.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) logD.push_back(traj.state(i).log_D);
  return equivalence_monitor(logD);
}

}  // namespace srf

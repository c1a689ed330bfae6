#include "srf/continuity.hpp"

#include "srf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace srf {

std::vector<double> default_t_grid() {
  std::vector<double> ts;
  constexpr int kUniform = 32;
  for (int i = 0; i < kUniform; ++i) ts.push_back(static_cast<double>(i) / (kUniform - 1));
  for (int j = 6; j <= 10; ++j) ts.push_back(1.0 - std::ldexp(1.0, -j));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

namespace {

struct Residual {
  Eigen::VectorXd G;
  Eigen::VectorXd Dnew;
  bool admissible = true;
};

Residual evaluate(const Eigen::VectorXd& psi, const MetricState& ref, double t) {
  const BackgroundGeometry& bg = *ref.bg;
  const Eigen::VectorXd& w = bg.grid->weights();
  const Eigen::VectorXd Hpsi = bg.H * psi;
  Residual r;
  r.Dnew = ref.D.values() + Hpsi;
  if (!(r.Dnew.minCoeff() > 0.0)) {
    r.admissible = false;
    return r;
  }
  const double L = w.dot(psi.cwiseProduct(ref.D.values() + 0.5 * Hpsi)) / kVolume;
  r.G.resize(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    r.G[i] = std::log1p(Hpsi[i] / ref.D[i]) + t * bg.kappa * psi[i] + L + ref.u[i];
  return r;
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& psi, const Residual& r, const MetricState& ref, double t) {
  const BackgroundGeometry& bg = *ref.bg;
  const Eigen::VectorXd& w = bg.grid->weights();
  Eigen::MatrixXd J = r.Dnew.cwiseInverse().asDiagonal() * bg.H;
  J.diagonal().array() += t * bg.kappa;
  // dL = Vol^-1 [w (D_ref + H psi / 2) + H^T (w psi) / 2]
  const Eigen::VectorXd dL =
      (w.cwiseProduct(ref.D.values() + 0.5 * bg.H * psi) + 0.5 * bg.H.transpose() * w.cwiseProduct(psi)) / kVolume;
  J.rowwise() += dL.transpose();
  return J;
}

}  // namespace

Field continuity_residual(const Field& psi, const MetricState& ref, double t) {
  require_same_grid(psi, ref.D);
  const Residual r = evaluate(psi.values(), ref, t);
  if (!r.admissible) throw InadmissibleError("continuity iterate is not admissible", 0.0, r.Dnew.minCoeff());
  return Field(ref.grid_ptr(), r.G);
}

ContinuityPath solve_path(const MetricState& ref, std::span<const double> t_grid, const NewtonConfig& cfg) {
  if (t_grid.empty() || t_grid.front() != 0.0) throw ConfigError("continuity t_grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]) || t_grid[i] > 1.0)
      throw ConfigError("continuity t_grid must be strictly increasing within [0, 1]");
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0) || !(cfg.damping_floor > 0.0 && cfg.damping_floor < 1.0))
    throw ConfigError("invalid Newton configuration");

  ContinuityPath path;
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(ref.grid().size());
  double last_good = -1.0;
  for (const double t : t_grid) {
    ContinuityPoint pt{t, Field::zeros(ref.grid_ptr()), {}, 0, 0.0, {}};
    Residual r = evaluate(psi, ref, t);
    if (!r.admissible) throw PathTermination("warm start is not admissible", last_good);
    double norm = r.G.cwiseAbs().maxCoeff();
    while (norm >= cfg.tol) {
      if (pt.iterations == cfg.max_iter) {
        std::ostringstream os;
        os << "Newton did not reach " << cfg.tol << " at t = " << t << " (residual " << norm << ")";
        throw PathTermination(os.str(), last_good);
      }
      pt.history.push_back(norm);
      const Eigen::MatrixXd J = jacobian(psi, r, ref, t);
      const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
      const Eigen::VectorXd delta = cod.solve(-r.G);
      if (!delta.allFinite()) throw PathTermination("Newton step is not finite", last_good);
      double lambda = 1.0;
      for (;;) {
        const Eigen::VectorXd trial = psi + lambda * delta;
        Residual rt = evaluate(trial, ref, t);
        if (rt.admissible) {
          const double nt = rt.G.cwiseAbs().maxCoeff();
          if (nt < (1.0 - 1e-4 * lambda) * norm) {
            psi = trial;
            r = std::move(rt);
            norm = nt;
            break;
          }
        }
        lambda *= 0.5;
        if (lambda < cfg.damping_floor) {
          std::ostringstream os;
          os << "damped Newton stalled at t = " << t << " (residual " << norm << ")";
          throw PathTermination(os.str(), last_good);
        }
      }
      ++pt.iterations;
    }
    pt.history.push_back(norm);
    pt.residual = norm;
    pt.psi = Field(ref.grid_ptr(), psi);
    pt.energy = energy_functionals(pt.psi, ref, cfg.energy_steps);
    path.points.push_back(std::move(pt));
    last_good = t;
  }
  return path;
}

MonotonicityReport path_monotonicity(const ContinuityPath& path, double slack) {
  MonotonicityReport rep;
  const auto& p = path.points;
  if (p.size() < 5) throw UsageError("monotonicity needs a path with at least 5 points");
  for (std::size_t k = 1; k < p.size(); ++k) {
    const double dM = p[k].energy.M - p[k - 1].energy.M;
    const double dIJ = (p[k].energy.I - p[k].energy.J) - (p[k - 1].energy.I - p[k - 1].energy.J);
    rep.max_M_increase = std::max(rep.max_M_increase, dM);
    rep.max_IJ_decrease = std::max(rep.max_IJ_decrease, -dIJ);
    if (dM > slack) rep.M_violations.push_back(p[k].t);
    if (-dIJ > slack) rep.IJ_violations.push_back(p[k].t);
  }
  rep.M_nonincreasing = rep.M_violations.empty();
  rep.IJ_nondecreasing = rep.IJ_violations.empty();
  return rep;
}

}  // namespace srf

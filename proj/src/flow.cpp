#include "srf/flow.hpp"

#include "srf/errors.hpp"
#include "srf/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace srf {

void FlowConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("flow: " + what); };
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("t_end must be finite and >= 0");
  if (!(dt_min > 0.0)) fail("dt_min must be > 0");
  if (!(dt_min <= dt_init)) fail("dt_min must not exceed dt_init");
  if (!(dt_init <= dt_max)) fail("dt_init must not exceed dt_max");
  if (!(rtol > 0.0)) fail("rtol must be > 0");
  if (!(atol >= 0.0)) fail("atol must be >= 0");
  if (!(sample_every > 0.0)) fail("sample_every must be > 0");
  if (!(eps_pos > 0.0)) fail("eps_pos must be > 0");
  if (!(r2_min > 0.0 && r2_min < 1.0)) fail("r2_min must lie in (0, 1)");
  if (!(sample_grading >= 0.0)) fail("sample_grading must be >= 0");
  if (!(sample_t0 > 0.0)) fail("sample_t0 must be > 0");
}

std::vector<double> sample_times(const FlowConfig& cfg) {
  const double l = cfg.sample_grading, t0 = cfg.sample_t0;
  const bool graded = l > t0;
  const double s_star = graded ? l * std::log(l / t0) : 0.0;
  const double t_star = graded ? l - t0 : 0.0;
  auto T = [&](double s) { return s < s_star ? t0 * std::expm1(s / l) : t_star + (s - s_star); };
  std::vector<double> ts{0.0};
  const double slack = 1e-9 * cfg.sample_every;
  for (long k = 1;; ++k) {
    const double t = T(k * cfg.sample_every);
    if (t >= cfg.t_end - slack) break;
    ts.push_back(t);
  }
  if (cfg.t_end > 0.0) ts.push_back(cfg.t_end);
  return ts;
}

FlowState initial_state(const Field& phi0) {
  const double mean = integrate(phi0) / phi0.grid().weights().sum();
  return FlowState{0.0, phi0 - mean, 0.0, mean};
}

bool gauge_enabled(const FlowConfig& cfg, const BackgroundGeometry& bg) {
  switch (cfg.gauge) {
    case GaugeMode::None:
      return false;
    case GaugeMode::Soliton:
      return true;
    case GaugeMode::Auto:
      return bg.futaki_closed_form() != 0.0;
  }
  return false;
}

namespace {

struct Workspace {
  const BackgroundGeometry& bg;
  bool gauged;
  double eps_pos;
};

// Pieces shared by the right-hand side and its Jacobian.
struct Eval {
  Eigen::VectorXd Hpsi, D, g, h, gt;
  double sigma = 0.0, m = 0.0;
};

Eval evaluate(const Eigen::VectorXd& psi, const Workspace& ws) {
  const BackgroundGeometry& bg = ws.bg;
  const Grid& grid = *bg.grid;
  const int n = grid.size();
  Eval e;
  e.Hpsi = bg.H * psi;
  e.D = e.Hpsi.array() + 1.0;
  Eigen::Index imin = 0;
  const double dmin = e.D.minCoeff(&imin);
  if (!(dmin > ws.eps_pos)) {
    std::ostringstream os;
    os << "flow left the admissible set: min D = " << dmin << " at y = " << grid.nodes()[imin];
    throw InadmissibleError(os.str(), grid.nodes()[imin], dmin);
  }
  e.g.resize(n);
  for (int i = 0; i < n; ++i) e.g[i] = std::log1p(e.Hpsi[i]) + bg.kappa * psi[i] - bg.F[i];
  e.gt = e.g;
  if (ws.gauged) {
    const Eigen::VectorXd dpsi = grid.diff() * psi;
    e.h = grid.nodes() + 0.5 * bg.phi0.values().cwiseProduct(dpsi);
    const Eigen::VectorXd mu = 0.5 * grid.weights().cwiseProduct(e.D);  // dm / Vol
    const double Eg = mu.dot(e.g), Eh = mu.dot(e.h);
    const double C = mu.dot(e.g.cwiseProduct(e.h)) - Eg * Eh;
    const double V = mu.dot(e.h.cwiseProduct(e.h)) - Eh * Eh;
    e.sigma = -0.5 * C / V;
    e.gt += 2.0 * e.sigma * e.h;
  }
  e.m = 0.5 * grid.weights().dot(e.gt);
  if (!e.gt.allFinite()) throw NumericError("flow right-hand side is not finite");
  return e;
}

Eigen::VectorXd project(Eigen::VectorXd v, const Grid& grid) {
  v.array() -= 0.5 * grid.weights().dot(v);
  return v;
}

// Exact Jacobian of psi -> P[g + 2 sigma h].
Eigen::MatrixXd jacobian(const Eval& e, const Workspace& ws) {
  const BackgroundGeometry& bg = ws.bg;
  const Grid& grid = *bg.grid;
  Eigen::MatrixXd Jg = e.D.cwiseInverse().asDiagonal() * bg.H;
  Jg.diagonal().array() += bg.kappa;
  Eigen::MatrixXd J = Jg;
  if (ws.gauged) {
    const Eigen::VectorXd& w = grid.weights();
    const Eigen::MatrixXd Jh = 0.5 * bg.phi0.values().asDiagonal() * grid.diff();
    const Eigen::VectorXd mu = 0.5 * w.cwiseProduct(e.D);
    const Eigen::VectorXd hw = 0.5 * w;
    auto mean = [&](const Eigen::VectorXd& x) { return mu.dot(x); };
    // Gradient of E[x] = int x dm / Vol for x = x(psi) with Jacobian Jx.
    auto dmean = [&](const Eigen::MatrixXd& Jx, const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return Jx.transpose() * mu + bg.H.transpose() * hw.cwiseProduct(x);
    };
    const Eigen::VectorXd gh = e.g.cwiseProduct(e.h), hh = e.h.cwiseProduct(e.h);
    const double Eg = mean(e.g), Eh = mean(e.h);
    const double C = mean(gh) - Eg * Eh;
    const double V = mean(hh) - Eh * Eh;
    const Eigen::VectorXd dEgh = Jg.transpose() * mu.cwiseProduct(e.h) + Jh.transpose() * mu.cwiseProduct(e.g) +
                                 bg.H.transpose() * hw.cwiseProduct(gh);
    const Eigen::VectorXd dEhh = 2.0 * Jh.transpose() * mu.cwiseProduct(e.h) + bg.H.transpose() * hw.cwiseProduct(hh);
    const Eigen::VectorXd dEg = dmean(Jg, e.g), dEh = dmean(Jh, e.h);
    const Eigen::VectorXd dC = dEgh - Eh * dEg - Eg * dEh;
    const Eigen::VectorXd dV = dEhh - 2.0 * Eh * dEh;
    const Eigen::VectorXd dsigma = -0.5 * (dC * V - C * dV) / (V * V);
    J += 2.0 * e.h * dsigma.transpose() + 2.0 * e.sigma * Jh;
  }
  // Row projection removes the dy-mean of every column image.
  const Eigen::RowVectorXd colmean = 0.5 * grid.weights().transpose() * J;
  J.rowwise() -= colmean;
  return J;
}

struct StepOutcome {
  Eigen::VectorXd psi;
  double err = 0.0;  // scaled error norm, <= 1 accepts
  Eval next;         // evaluation at the new state
};

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const FlowConfig& cfg) {
  const double scale = cfg.atol + cfg.rtol * std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (scale == 0.0) return err.cwiseAbs().maxCoeff() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return err.cwiseAbs().maxCoeff() / scale;
}

// ROS2: (I - gamma h J) k1 = f(y); (I - gamma h J) k2 = f(y + h k1) - 2 k1;
// y+ = y + 3h/2 k1 + h/2 k2, embedded Euler-type estimate h/2 (k1 + k2).
StepOutcome ros2_step(const Eigen::VectorXd& psi, const Eval& e0, double h, const Workspace& ws,
                      const FlowConfig& cfg) {
  const Grid& grid = *ws.bg.grid;
  constexpr double gamma = 1.0 + 0.70710678118654752440;
  Eigen::MatrixXd W = -gamma * h * jacobian(e0, ws);
  W.diagonal().array() += 1.0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
  const Eigen::VectorXd f0 = project(e0.gt, grid);
  const Eigen::VectorXd k1 = lu.solve(f0);
  const Eval e1 = evaluate(psi + h * k1, ws);
  const Eigen::VectorXd k2 = lu.solve(project(e1.gt, grid) - 2.0 * k1);
  StepOutcome out;
  out.psi = project(psi + 1.5 * h * k1 + 0.5 * h * k2, grid);
  out.err = error_norm(0.5 * h * (k1 + k2), psi, out.psi, cfg);
  out.next = evaluate(out.psi, ws);
  return out;
}

// Heun with embedded Euler.
StepOutcome heun_step(const Eigen::VectorXd& psi, const Eval& e0, double h, const Workspace& ws,
                      const FlowConfig& cfg) {
  const Grid& grid = *ws.bg.grid;
  const Eigen::VectorXd k1 = project(e0.gt, grid);
  const Eval e1 = evaluate(psi + h * k1, ws);
  const Eigen::VectorXd k2 = project(e1.gt, grid);
  StepOutcome out;
  out.psi = project(psi + 0.5 * h * (k1 + k2), grid);
  out.err = error_norm(0.5 * h * (k2 - k1), psi, out.psi, cfg);
  out.next = evaluate(out.psi, ws);
  return out;
}

StepOutcome try_step(const Eigen::VectorXd& psi, const Eval& e0, double h, const Workspace& ws,
                     const FlowConfig& cfg) {
  return cfg.scheme == Scheme::Imex ? ros2_step(psi, e0, h, ws, cfg) : heun_step(psi, e0, h, ws, cfg);
}

// M(t+h) for dM/dt = kappa M + m with m linear across the step (trapezoid on
// the variation-of-constants integral).
double advance_M(double M, double m0, double m1, double kappa, double h) {
  const double e = std::exp(kappa * h);
  return e * M + 0.5 * h * (e * m0 + m1);
}

[[noreturn]] void stiff(double t, double h) {
  std::ostringstream os;
  os << "step size fell below dt_min at t = " << t << " (last dt = " << h << ")";
  throw StiffFailure(os.str(), t, h);
}

// Covers exactly dt, halving on admissibility failure.
void cover(Eigen::VectorXd& psi, Eval& e, double& M, double t, double dt, const Workspace& ws,
           const FlowConfig& cfg) {
  if (dt < cfg.dt_min) stiff(t, dt);
  try {
    StepOutcome out = try_step(psi, e, dt, ws, cfg);
    M = advance_M(M, e.m, out.next.m, ws.bg.kappa, dt);
    psi = std::move(out.psi);
    e = std::move(out.next);
  } catch (const InadmissibleError&) {
    cover(psi, e, M, t, 0.5 * dt, ws, cfg);
    cover(psi, e, M, t + 0.5 * dt, 0.5 * dt, ws, cfg);
  }
}

FlowSample make_sample(double t, const Eigen::VectorXd& psi, double M, double mu0, const Eval& e,
                       const GridPtr& grid) {
  return FlowSample{t, Field(grid, psi), M, mu0, e.sigma, e.m};
}

}  // namespace

FlowRhs flow_rhs(const Field& psi, const BackgroundGeometry& bg, bool gauged, double eps_pos) {
  const Workspace ws{bg, gauged, eps_pos};
  const Eval e = evaluate(psi.values(), ws);
  return FlowRhs{Field(bg.grid, project(e.gt, *bg.grid)), e.m, e.sigma, Field(bg.grid, e.D)};
}

FlowState step(const FlowState& s, const BackgroundPtr& bg, double dt, const FlowConfig& cfg) {
  cfg.validate();
  const Workspace ws{*bg, gauge_enabled(cfg, *bg), cfg.eps_pos};
  Eigen::VectorXd psi = s.psi.values();
  Eval e = evaluate(psi, ws);
  double M = s.M;
  cover(psi, e, M, s.t, dt, ws, cfg);
  return FlowState{s.t + dt, Field(bg->grid, psi), M, s.mu0};
}

MetricState step(const MetricState& state, double dt, const FlowConfig& cfg) {
  FlowConfig pure = cfg;
  pure.gauge = GaugeMode::None;
  FlowState fs = initial_state(state.phi);
  fs.t = state.t;
  const FlowState next = step(fs, state.bg, dt, pure);
  const double offset = next.M + next.mu0 * std::exp(state.bg->kappa * dt);
  return validate_state(next.psi + offset, state.bg, cfg.eps_pos, next.t);
}

Trajectory integrate_flow(const Field& phi0, const BackgroundPtr& bg, const FlowConfig& cfg) {
  cfg.validate();
  require_same_grid(phi0, bg->phi0);
  const GridPtr& grid = bg->grid;
  // Rejects inadmissible initial data with the geometry's own error.
  validate_state(phi0, bg, cfg.eps_pos);

  Trajectory traj;
  traj.bg = bg;
  traj.gauged = gauge_enabled(cfg, *bg);
  traj.sample_every = cfg.sample_every;
  const Workspace ws{*bg, traj.gauged, cfg.eps_pos};

  const FlowState s0 = initial_state(phi0);
  Eigen::VectorXd psi = s0.psi.values();
  double M = 0.0;
  const double mu0 = s0.mu0;
  Eval e = evaluate(psi, ws);
  traj.samples.push_back(make_sample(0.0, psi, M, mu0, e, grid));

  const std::vector<double> times = sample_times(cfg);
  double t = 0.0;
  double h_ctrl = cfg.dt_init;  // step suggested by the controller
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double t_next = times[k];
    while (t < t_next) {
      double h = std::min(h_ctrl, cfg.dt_max);
      bool landing = false;
      if (t + h >= t_next - 1e-12 * std::max(1.0, t_next)) {
        h = t_next - t;
        landing = true;
      }
      if (h < cfg.dt_min) stiff(t, h);
      StepOutcome out;
      try {
        out = try_step(psi, e, h, ws, cfg);
      } catch (const InadmissibleError&) {
        h_ctrl = 0.5 * h;
        continue;
      }
      if (!(out.err <= 1.0)) {
        h_ctrl = h * (std::isfinite(out.err) ? std::max(0.2, 0.9 / std::sqrt(out.err)) : 0.2);
        continue;
      }
      M = advance_M(M, e.m, out.next.m, bg->kappa, h);
      psi = std::move(out.psi);
      e = std::move(out.next);
      const double grow = out.err > 0.0 ? std::min(2.0, 0.9 / std::sqrt(out.err)) : 2.0;
      // A step shortened to land on a sample says nothing against the longer one.
      h_ctrl = landing ? std::max(h_ctrl, h * grow) : h * grow;
      t = landing ? t_next : t + h;
    }
    traj.samples.push_back(make_sample(t, psi, M, mu0, e, grid));
    if (cfg.early_stop && project(e.gt, *grid).cwiseAbs().maxCoeff() < cfg.stall_tol) break;
  }
  return traj;
}

Trajectory run(const Field& phi0, const BackgroundPtr& bg, const FlowConfig& cfg, const AnnotateOptions& opts) {
  Trajectory traj = integrate_flow(phi0, bg, cfg);
  annotate(traj, opts);
  traj.verdict = detect_limit(traj, cfg);
  return traj;
}

LimitVerdict detect_limit(const Trajectory& traj, const FlowConfig& cfg) {
  LimitVerdict v;
  const auto& rows = traj.rows;
  if (rows.size() < 20) return v;
  std::vector<double> t, Y;
  for (const DiagnosticsRow& r : rows) {
    t.push_back(r.t);
    Y.push_back(r.Y);
  }
  v.level = Y.back();
  const double ymax = *std::max_element(Y.begin(), Y.end());
  if (ymax < 1e-28) {
    v.kind = VerdictKind::Converged;
    v.rate = std::numeric_limits<double>::infinity();
    v.r2 = 1.0;
    return v;
  }
  try {
    const DecayFit fit = fit_decay_rate(t, Y, 1e-24);
    v.rate = fit.rate;
    v.r2 = fit.r2;
  } catch (const FitUnavailable&) {
  }

  // Late-time logarithmic slope over the last third.
  const std::size_t lo = rows.size() - rows.size() / 3;
  bool positive = true;
  for (std::size_t i = lo; i < rows.size(); ++i) positive = positive && Y[i] > 0.0;
  if (positive && rows.size() - lo >= 2) {
    double mt = 0.0, ml = 0.0;
    const double cnt = static_cast<double>(rows.size() - lo);
    for (std::size_t i = lo; i < rows.size(); ++i) {
      mt += t[i] / cnt;
      ml += std::log(Y[i]) / cnt;
    }
    double stt = 0.0, stl = 0.0;
    for (std::size_t i = lo; i < rows.size(); ++i) {
      stt += (t[i] - mt) * (t[i] - mt);
      stl += (t[i] - mt) * (std::log(Y[i]) - ml);
    }
    if (stt > 0.0) v.slope = stl / stt;
  }

  if (std::isfinite(v.r2) && v.r2 > cfg.r2_min && v.rate > 0.0 && v.level < cfg.converged_level)
    v.kind = VerdictKind::Converged;
  else if (std::isfinite(v.slope) && std::abs(v.slope) < cfg.flat_slope && v.level > cfg.floor_level)
    v.kind = VerdictKind::SolitonFloor;
  return v;
}

Renormalization renormalize_initial(const Trajectory& traj, const FlowConfig& cfg) {
  if (traj.rows.size() != traj.samples.size() || traj.samples.size() < 2)
    throw RenormalizationUnavailable("renormalization needs an annotated trajectory");
  const double kappa = traj.bg->kappa;
  const auto& rows = traj.rows;
  const std::size_t n = rows.size();

  std::vector<double> t, Y;
  for (const DiagnosticsRow& r : rows) {
    t.push_back(r.t);
    Y.push_back(r.Y);
  }
  Renormalization out{traj};
  double integral = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    integral += 0.5 * (t[i] - t[i - 1]) * (std::exp(-kappa * t[i - 1]) * Y[i - 1] + std::exp(-kappa * t[i]) * Y[i]);
  double tail = 0.0;
  if (*std::max_element(Y.begin(), Y.end()) >= 1e-28) {
    DecayFit fit;
    try {
      fit = fit_decay_rate(t, Y, 1e-24);
    } catch (const FitUnavailable& e) {
      throw RenormalizationUnavailable(std::string("Y has not entered exponential decay: ") + e.what());
    }
    if (!(fit.r2 > cfg.r2_min) || !(fit.rate > 0.0)) {
      std::ostringstream os;
      os << "Y is not decaying exponentially (rate " << fit.rate << ", r2 " << fit.r2 << ")";
      throw RenormalizationUnavailable(os.str());
    }
    tail = Y.back() * std::exp(-kappa * t.back()) / (kappa + fit.rate);
  }
  integral += tail;
  out.tail_fraction = integral > 0.0 ? tail / integral : 0.0;

  const MetricState s0 = traj.state(0);
  const double log_term = integrate_dm(s0.log_D - traj.bg->F, s0) / kVolume;
  out.c0 = (integral / kVolume - log_term) / kappa;

  // Bounded solution of dN/dt = kappa N + m, integrated backwards from the
  // plateau N(t_end) = -m(t_end)/kappa; no exponential amplification.
  std::vector<double> N(n);
  N[n - 1] = -traj.samples[n - 1].m / kappa;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double dt = t[i + 1] - t[i];
    const double e = std::exp(-kappa * dt);
    N[i] = e * N[i + 1] - 0.5 * dt * (traj.samples[i].m + e * traj.samples[i + 1].m);
  }
  const double psi0_mean = integrate_dm(traj.samples[0].psi, s0) / kVolume;
  out.c0_direct = N[0] + psi0_mean;

  out.sup_u = 0.0;
  out.sup_phidot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    FlowSample& s = out.trajectory.samples[i];
    s.M = N[i];
    s.mu0 = 0.0;
    const FlowRhs rhs = flow_rhs(s.psi, *traj.bg, traj.gauged, cfg.eps_pos);
    const double shift = rhs.m + kappa * N[i];
    const double sup = (rhs.dpsi.values().array() + shift).abs().maxCoeff();
    out.sup_phidot = std::max(out.sup_phidot, sup);
    out.sup_u = std::max(out.sup_u, rows[i].u_sup);
  }
  return out;
}

}  // namespace srf

#pragma once

// Continuity path for the reduced Monge-Ampere family
//   log((D_ref + H0[psi]) / D_ref) = -t kappa psi - L(psi) + h,   h = -u_ref,
// followed from t = 0 to t = 1 by damped Newton with warm starts.

#include "srf/functionals.hpp"
#include "srf/geometry.hpp"

#include <span>
#include <vector>

namespace srf {

struct NewtonConfig {
  int max_iter = 50;
  double tol = 1e-10;             // max-norm residual accepted at every path point
  double damping_floor = 0x1p-20;  // smallest backtracking factor
  int energy_steps = 24;           // path quadrature for the energy functionals
};

struct ContinuityPoint {
  double t = 0.0;
  Field psi;
  EnergyReport energy;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  // residual before each Newton update, then the final one
};

struct ContinuityPath {
  std::vector<ContinuityPoint> points;
};

/// 32 uniform points on [0, 1] plus 1 - 2^-j, j = 6..10.
std::vector<double> default_t_grid();

/// Residual field of the path equation at parameter t.
Field continuity_residual(const Field& psi, const MetricState& reference, double t);

ContinuityPath solve_path(const MetricState& reference, std::span<const double> t_grid,
                          const NewtonConfig& cfg = {});

struct MonotonicityReport {
  double max_M_increase = 0.0;    // max over steps of M(t_{k+1}) - M(t_k), clipped at 0
  double max_IJ_decrease = 0.0;   // max over steps of (I-J)(t_k) - (I-J)(t_{k+1}), clipped at 0
  std::vector<double> M_violations;   // t values where M increased beyond the slack
  std::vector<double> IJ_violations;
  bool M_nonincreasing = true;
  bool IJ_nondecreasing = true;
};

MonotonicityReport path_monotonicity(const ContinuityPath& path, double slack = 1e-8);

}  // namespace srf

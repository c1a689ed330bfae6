#pragma once

// Scalar functionals of a transverse metric and the identities they satisfy.
// Conventions: |df|^2_g = phi0 f'^2 / (2D), dm = D dy, Vol = 2.

#include "srf/geometry.hpp"

#include <span>

namespace srf {

/// One row of the per-sample time series. The first block is the public table
/// (column order fixed by the CSV writer); the second block feeds fits and the
/// identity suite.
struct DiagnosticsRow {
  double t = 0.0;
  double Y = 0.0, W = 0.0, Z = 0.0, a = 0.0;
  double vol = 0.0;
  double R_mean = 0.0, R_min = 0.0, R_max = 0.0;
  double osc_u = 0.0, grad_u_max = 0.0;
  double fut = 0.0;
  double mabuchi = 0.0;
  double nu = 0.0, lambda_lo = 0.0, lambda_hi = 0.0;
  double diam_T = 0.0;
  int dim_hol = 0;
  double shi_m1 = 0.0, shi_m2 = 0.0;
  double equiv_int = 0.0;

  double u_sup = 0.0;           // max |u|
  double lambda_min = 0.0;      // lowest normalized eigenvalue of L
  double fut_pairing = 0.0;     // gradient-pairing Futaki
  double fut_curvature = 0.0;   // curvature-weighted Futaki
  double gauss_bonnet = 0.0;    // int R dm
  double ydot_rhs = 0.0;        // right-hand side of the Y evolution identity
  double bk_residual = 0.0;     // worst Bochner-Kodaira residual over the test set
  double poincare_slack = 0.0;  // worst Poincare slack over the random test set
  double dR_max = 0.0;          // max |dR|_g
  double ddR_max = 0.0;         // max full Hessian norm of R
};

struct StateFunctionals {
  double a = 0.0, Y = 0.0, W = 0.0, Z = 0.0;
};

/// a = Vol^-1 int u e^-u dm, Y = int |du|^2 dm, W = Vol^-1 int (u-a)^2 e^-u dm,
/// Z = Vol^-1 int (|du|^2 - kappa (u-a)^2) e^-u dm (so that Z = da/dt).
StateFunctionals state_functionals(const MetricState& state);

/// Row with every state-local column; spectral and monitor columns are left at
/// zero. mabuchi continues the trapezoid accumulator from prev.back().
DiagnosticsRow diagnostics(const MetricState& state, std::span<const DiagnosticsRow> prev);

/// -int_0^t Y ds by the trapezoid rule over the samples seen so far.
double mabuchi_increment(const DiagnosticsRow& prev, double t, double Y);

enum class FutakiMethod { GradientPairing, CurvatureWeighted, ClosedForm };

/// Futaki invariant paired with the evolving moment map h (h' = D).
double futaki(const MetricState& state, FutakiMethod method);

/// int <dh, du> dm - int h (R - kappa) dm for an arbitrary test function h.
double futaki_ibp_residual(const Field& h, const MetricState& state);

/// Relative residual of int (Lap f)^2 = int |grad grad f|^2 + int R |df|^2.
double bochner_kodaira_residual(const Field& f, const MetricState& state);

/// dY/dt predicted from the state: 2 kappa Y - int R|du|^2 - int (Lap u)^2 - int |grad grad u|^2.
double y_evolution_rhs(const MetricState& state);

struct Trajectory;

/// |finite-difference dY/dt - y_evolution_rhs| / max(|dY/dt|, Y, 1e-14) at an
/// interior sample of an annotated trajectory.
double y_evolution_residual(const Trajectory& traj, std::size_t i);

/// Poincare slack kappa^-1 <|df|^2> - Var(f) for the e^-u dm probability
/// measure; nonnegative whenever the spectrum of L is >= kappa.
double poincare_slack(const Field& f, const MetricState& state);

/// Energy functionals of psi relative to a reference metric, along the linear
/// path s psi.
struct EnergyReport {
  double I = 0.0, J = 0.0, L = 0.0, M = 0.0;
};

EnergyReport energy_functionals(const Field& psi, const MetricState& reference, int steps = 24);

/// L(psi) = Vol^-1 int psi (D_ref + H0[psi]/2) dy, the linear-path value.
double aubin_yau_L(const Field& psi, const MetricState& reference);

}  // namespace srf

#pragma once

// Spectrum of the weighted Laplacian L = -Lap + <du, d.>, condition flags, decay
// fits and the smoothing / equivalence monitors.

#include "srf/functionals.hpp"
#include "srf/geometry.hpp"
#include "srf/trajectory.hpp"

#include <span>
#include <utility>
#include <vector>

namespace srf {

inline constexpr double kGapTolerance = 5e-3;

/// Dirichlet form A(f,h) = int (phi0/2) f' h' e^-u dy and mass form
/// B(f,h) = int f h e^-u D dy in nodal coordinates.
struct Pencil {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;  // diagonal of the mass matrix
};

Pencil assemble_L(const MetricState& state);

struct Cluster {
  double value = 0.0;
  int multiplicity = 0;
};

struct SpectrumReport {
  /// Ascending eigenvalues of L on e^-u dm mean-zero functions, divided by kappa.
  std::vector<double> eigenvalues;
  std::vector<Cluster> clusters;
  double nu = 0.0;
  double lambda_lo = 0.0, lambda_hi = 0.0;
  int dim_hol = 0;
  double osc_u = 0.0;
};

/// k smallest normalized eigenvalues (k <= N/4); nu, lambda proxy and dim_hol
/// always use the full discrete spectrum.
SpectrumReport eigen_spectrum(const MetricState& state, int k, double gap_tol = kGapTolerance);

struct DecayFit {
  double rate = 0.0;
  double r2 = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t count = 0;
};

/// Least-squares slope of log(value) on the trailing third of the leading run
/// of samples above `floor`. Needs >= 10 samples in the window.
DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> value, double floor = 0.0);

struct ConditionFlags {
  bool M_proxy = false, F = false, T = false, C_proxy = false;
  double mabuchi_tail = 0.0;   // |mabuchi(t_end) - mabuchi(2 t_end / 3)|
  double max_abs_fut = 0.0;
  double min_lambda_lo = 0.0;
  int dim_hol_min = 0, dim_hol_max = 0;
};

inline constexpr double kDeltaT = 0.1;
inline constexpr double kFutakiTolerance = 1e-6;
inline constexpr double kMabuchiFlatTolerance = 1e-8;

ConditionFlags condition_flags(std::span<const DiagnosticsRow> rows, double delta_T = kDeltaT,
                               double tol_F = kFutakiTolerance);

/// Per-sample Shi monitor values: m1 = sqrt(t) max|dR| / max(sqrt K, K) and
/// m2 = t max|grad grad R| / max(sqrt K, K), K = max |R| on t <= 1.
struct ShiMonitor {
  std::vector<double> m1, m2;
  double sup_m1 = 0.0, sup_m2 = 0.0;  // over t in (0, min(1, t_end)]
  double K = 0.0;
};

/// Inputs per sample: t, max |R|, max |dR|_g, max |grad grad R|_g.
struct CurvatureSample {
  double t = 0.0, R_abs = 0.0, dR = 0.0, ddR = 0.0;
};

ShiMonitor shi_monitor(std::span<const CurvatureSample> samples);
ShiMonitor shi_monitor(const Trajectory& traj);
CurvatureSample curvature_sample(const MetricState& state);

struct EquivalenceMonitor {
  std::vector<double> cumulative;  // sum of max_y |log D_{i+1} - log D_i|
  double integral = 0.0;
  double log_ratio = 0.0;          // log sup_{s,t} max_y D_t / D_s
};

EquivalenceMonitor equivalence_monitor(std::span<const Field> log_densities);
EquivalenceMonitor equivalence_monitor(const Trajectory& traj);

}  // namespace srf

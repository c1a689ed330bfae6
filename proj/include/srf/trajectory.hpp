#pragma once

// Flow trajectory data shared by the flow, stability and serialization layers.

#include "srf/functionals.hpp"
#include "srf/geometry.hpp"

#include <limits>
#include <string>
#include <vector>

namespace srf {

/// Potential at one sample, stored as phi = psi + M + mu0 e^{kappa t} with psi
/// dy-mean-zero. The gauge mode mu0 e^{kappa t} never feeds back into the
/// geometry; keeping it apart preserves precision of psi on long runs.
struct FlowSample {
  double t = 0.0;
  Field psi;
  double M = 0.0;
  double mu0 = 0.0;
  double sigma = 0.0;  // soliton-gauge rate (0 on pure-flow runs)
  double m = 0.0;      // dy-mean of the flow speed, dM/dt = kappa M + m

  double offset(double kappa) const;
  Field phi(double kappa) const { return psi + offset(kappa); }
};

enum class VerdictKind { Converged, SolitonFloor, Undecided };

struct LimitVerdict {
  VerdictKind kind = VerdictKind::Undecided;
  double rate = std::numeric_limits<double>::quiet_NaN();   // fitted Y decay rate
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double level = std::numeric_limits<double>::quiet_NaN();  // Y(t_end)
  double slope = std::numeric_limits<double>::quiet_NaN();  // d log Y / dt near t_end
};

std::string to_string(VerdictKind kind);

struct Trajectory {
  BackgroundPtr bg;
  bool gauged = false;
  double sample_every = 0.0;
  std::vector<FlowSample> samples;
  std::vector<DiagnosticsRow> rows;
  LimitVerdict verdict;

  std::size_t size() const { return samples.size(); }
  /// Rebuilds the metric at sample i from psi alone.
  MetricState state(std::size_t i) const;
};

}  // namespace srf

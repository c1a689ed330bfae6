#include "srf/trajectory.hpp"

#include "srf/errors.hpp"

#include <cmath>

namespace srf {

double FlowSample::offset(double kappa) const {
  // Long double keeps the cancellation between M and the gauge mode harmless
  // on renormalized trajectories.
  const long double e = std::exp(static_cast<long double>(kappa) * t);
  return static_cast<double>(static_cast<long double>(M) + static_cast<long double>(mu0) * e);
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::Converged:
      return "converged";
    case VerdictKind::SolitonFloor:
      return "soliton_floor";
    case VerdictKind::Undecided:
      return "undecided";
  }
  return "undecided";
}

MetricState Trajectory::state(std::size_t i) const {
  if (i >= samples.size()) throw UsageError("sample index out of range");
  return validate_state(samples[i].psi, bg, kDefaultPositivityFloor, samples[i].t);
}

}  // namespace srf

#pragma once

// Per-sample diagnostics kernel: state functionals, spectrum of L and the
// identity checks. Samples are independent, so the parallel driver splits them
// over OpenMP threads; the serial driver is the bitwise reference.

#include "srf/trajectory.hpp"

#include <cstdint>
#include <functional>

namespace srf {

struct AnnotateOptions {
  std::uint64_t seed = 0;
  int poincare_functions = 20;
  int spectrum_k = 8;
  int n_threads = 0;  // 0: OpenMP default
  // Applied to every rebuilt sample state before evaluation (mutation tests).
  std::function<void(MetricState&)> state_hook;
};

/// Random smooth test function number `j` for sample `index` (deterministic).
Field random_test_function(const GridPtr& grid, std::uint64_t seed, std::size_t index, int j);

/// Every column that depends on the sample alone (mabuchi, Shi and
/// equivalence columns are filled by the sequential pass).
DiagnosticsRow sample_diagnostics(const MetricState& state, const AnnotateOptions& opts, std::size_t index);

/// Fills traj.rows using OpenMP over samples.
void annotate(Trajectory& traj, const AnnotateOptions& opts);
/// Same result computed on one thread.
void annotate_serial(Trajectory& traj, const AnnotateOptions& opts);

/// Sequential columns: mabuchi accumulator, Shi monitors and the cumulative
/// equivalence integral.
void finish_sequential_columns(Trajectory& traj);

}  // namespace srf

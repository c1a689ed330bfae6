#include "srf/annotate.hpp"

#include "srf/stability.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace srf {

namespace {

constexpr int kTestDegree = 10;

MetricState sample_state(const Trajectory& traj, std::size_t i, const AnnotateOptions& opts) {
  MetricState s = traj.state(i);
  if (opts.state_hook) opts.state_hook(s);
  return s;
}

}  // namespace

Field random_test_function(const GridPtr& grid, std::uint64_t seed, std::size_t index, int j) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(j)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd c(kTestDegree + 1);
  for (int k = 0; k <= kTestDegree; ++k) c[k] = unit(rng) / (1.0 + k);
  return from_legendre(grid, c);
}

DiagnosticsRow sample_diagnostics(const MetricState& s, const AnnotateOptions& opts, std::size_t index) {
  DiagnosticsRow r = diagnostics(s, {});

  const SpectrumReport spec = eigen_spectrum(s, opts.spectrum_k);
  r.nu = spec.nu;
  r.lambda_lo = spec.lambda_lo;
  r.lambda_hi = spec.lambda_hi;
  r.dim_hol = spec.dim_hol;
  r.lambda_min = spec.eigenvalues.front();

  const GridPtr& g = s.grid_ptr();
  double bk = bochner_kodaira_residual(s.u, s);
  for (int k = 1; k <= 3; ++k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
    c[k] = 1.0;
    bk = std::max(bk, bochner_kodaira_residual(from_legendre(g, c), s));
  }
  double slack = std::numeric_limits<double>::infinity();
  for (int j = 0; j < opts.poincare_functions; ++j) {
    const Field f = random_test_function(g, opts.seed, index, j);
    bk = std::max(bk, bochner_kodaira_residual(f, s));
    slack = std::min(slack, poincare_slack(f, s));
  }
  r.bk_residual = bk;
  r.poincare_slack = opts.poincare_functions > 0 ? slack : 0.0;
  return r;
}

void finish_sequential_columns(Trajectory& traj) {
  auto& rows = traj.rows;
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i].mabuchi = i == 0 ? 0.0 : rows[i - 1].mabuchi + mabuchi_increment(rows[i - 1], rows[i].t, rows[i].Y);

  const ShiMonitor shi = shi_monitor(traj);
  const EquivalenceMonitor eq = equivalence_monitor(traj);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].shi_m1 = shi.m1[i];
    rows[i].shi_m2 = shi.m2[i];
    rows[i].equiv_int = eq.cumulative[i];
  }
}

void annotate_serial(Trajectory& traj, const AnnotateOptions& opts) {
  traj.rows.assign(traj.size(), DiagnosticsRow{});
  for (std::size_t i = 0; i < traj.size(); ++i) traj.rows[i] = sample_diagnostics(sample_state(traj, i, opts), opts, i);
  finish_sequential_columns(traj);
}

void annotate(Trajectory& traj, const AnnotateOptions& opts) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(traj.size());
  traj.rows.assign(traj.size(), DiagnosticsRow{});
  const int threads = opts.n_threads > 0 ? opts.n_threads : omp_get_max_threads();
  // Exceptions must not cross the parallel region; keep the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    try {
      traj.rows[k] = sample_diagnostics(sample_state(traj, k, opts), opts, k);
    } catch (...) {
#pragma omp critical(srf_annotate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  finish_sequential_columns(traj);
}

}  // namespace srf

// Times the per-sample diagnostics kernel: OpenMP driver against the serial
// reference on one integrated trajectory, and confirms identical output.

#include "srf/annotate.hpp"
#include "srf/flow.hpp"

#include <fmt/core.h>
#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <cstring>

using namespace srf;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const Trajectory& a, const Trajectory& b) {
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const DiagnosticsRow &x = a.rows[i], &y = b.rows[i];
    const double px[] = {x.Y, x.W, x.Z, x.a, x.fut, x.nu, x.lambda_min, x.bk_residual, x.poincare_slack, x.mabuchi};
    const double py[] = {y.Y, y.W, y.Z, y.a, y.fut, y.nu, y.lambda_min, y.bk_residual, y.poincare_slack, y.mabuchi};
    if (std::memcmp(px, py, sizeof px) != 0 || x.dim_hol != y.dim_hol) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 128;
  const double t_end = argc > 2 ? std::atof(argv[2]) : 4.0;
  const BackgroundPtr bg = make_background({2.0, 1.0, n});
  Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  c[2] = 0.3;
  FlowConfig cfg;
  cfg.t_end = t_end;
  Trajectory base;
  const double t_flow = seconds([&] { base = integrate_flow(from_legendre(bg->grid, c), bg, cfg); });
  fmt::print("grid {}, {} samples, integration {:.3f} s\n", n, base.size(), t_flow);

  AnnotateOptions opts;
  Trajectory serial = base;
  const double t_serial = seconds([&] { annotate_serial(serial, opts); });
  fmt::print("serial    {:8.3f} s\n", t_serial);
  for (int threads : {1, 2, 4, omp_get_max_threads()}) {
    opts.n_threads = threads;
    Trajectory par = base;
    const double t = seconds([&] { annotate(par, opts); });
    fmt::print("openmp {:2d} {:8.3f} s  speedup {:5.2f}  {}\n", threads, t, t_serial / t,
               identical(par, serial) ? "bitwise identical" : "MISMATCH");
  }
  return 0;
}

#include "fixtures.hpp"
#include "srf/annotate.hpp"
#include "srf/flow.hpp"

#include <doctest.h>

#include <cstring>
#include <vector>

using namespace srf;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool rows_identical(const DiagnosticsRow& a, const DiagnosticsRow& b) {
  const auto fields = [](const DiagnosticsRow& r) {
    return std::vector<double>{r.t, r.Y, r.W, r.Z, r.a, r.vol, r.R_mean, r.R_min, r.R_max, r.osc_u,
                               r.grad_u_max, r.fut, r.mabuchi, r.nu, r.lambda_lo, r.lambda_hi, r.diam_T,
                               r.shi_m1, r.shi_m2, r.equiv_int, r.u_sup, r.lambda_min, r.fut_pairing,
                               r.fut_curvature, r.gauss_bonnet, r.ydot_rhs, r.bk_residual, r.poincare_slack,
                               r.dR_max, r.ddR_max};
  };
  const std::vector<double> x = fields(a), y = fields(b);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!same_bits(x[i], y[i])) return false;
  return a.dim_hol == b.dim_hol;
}

}  // namespace

TEST_CASE("parallel annotation is bitwise identical to the serial reference") {
  for (const char* which : {"perturbed", "football"}) {
    Trajectory base = fixtures::run(which, 1.0, 64);
    AnnotateOptions opts;
    opts.seed = 17;
    Trajectory serial = base;
    annotate_serial(serial, opts);
    for (int threads : {1, 2, 4}) {
      opts.n_threads = threads;
      Trajectory par = base;
      annotate(par, opts);
      REQUIRE(par.rows.size() == serial.rows.size());
      bool all = true;
      for (std::size_t i = 0; i < par.rows.size(); ++i) all = all && rows_identical(par.rows[i], serial.rows[i]);
      CHECK_MESSAGE(all, which << " with " << threads << " threads");
    }
  }
}

#pragma once

// Short annotated runs shared by several test cases; each is integrated once
// per test binary.

#include "srf/annotate.hpp"
#include "srf/flow.hpp"

#include <map>
#include <string>

namespace fixtures {

inline srf::Field p2(const srf::GridPtr& g, double amp) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  c[2] = amp;
  return srf::from_legendre(g, c);
}

/// "round", "perturbed" (0.3 P2) or "football" on N = n up to t_end.
inline const srf::Trajectory& run(const std::string& which, double t_end, int n = 128) {
  static std::map<std::string, srf::Trajectory> cache;
  const std::string key = which + "/" + std::to_string(t_end) + "/" + std::to_string(n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const bool football = which == "football";
  const srf::BackgroundPtr bg = srf::make_background({2.0, football ? 1.0 : 2.0, n});
  const srf::Field phi0 = which == "perturbed" ? p2(bg->grid, 0.3) : srf::Field::zeros(bg->grid);
  srf::FlowConfig cfg;
  cfg.t_end = t_end;
  return cache.emplace(key, srf::run(phi0, bg, cfg)).first->second;
}

}  // namespace fixtures

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace srf::cli {

/// Deliberate defects for verifying that the suites can fail.
enum class Mutation { None, FlipCurvatureSign };

struct CheckOptions {
  std::uint64_t seed = 0;
  int n_threads = 0;
  double t_end_cap = 0.0;  // > 0: shorten every preset run to at most this time
  int grid_size = 0;       // > 0: override the preset grid size
  bool cadence = true;     // also run at half cadence for the Y-identity convergence suite
  bool oracle = true;
  Mutation mutation = Mutation::None;
};

struct SuiteResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool at_least = false;  // value must be >= threshold (otherwise < threshold)
  bool passed = false;
  std::string note;
};

struct CheckReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
};

/// Reduced formulas against 2D finite differences in the complex chart
/// s = log|z|^2 of the regular background, g0 = 2 / (1 + |z|^2)^2.
/// Values are the worst absolute errors scaled by max(1, |reduced value|).
struct OracleResult {
  double log_det = 0.0;     // log(g / g0) vs log D
  double R = 0.0;           // -g^-1 d dbar log g vs R
  double grad_u = 0.0;      // g^-1 |d_z u|^2 vs phi0 u'^2 / (2D)
  double laplacian_u = 0.0; // g^-1 d dbar u vs kappa - R
  int points = 0;
};

OracleResult reduction_oracle(std::uint64_t seed, int potentials = 3);

CheckReport run_check(const CheckOptions& opts, std::ostream* progress = nullptr);

nlohmann::json check_json(const CheckReport& rep);

/// Prints one line per suite; returns 0 when every suite passes, 1 otherwise.
/// Writes check.json into out_dir when it is non-empty.
int cmd_check(const CheckOptions& opts, const std::string& out_dir, std::ostream& log);

}  // namespace srf::cli

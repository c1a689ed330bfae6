#pragma once

#include "srf/annotate.hpp"
#include "srf/continuity.hpp"
#include "srf/flow.hpp"
#include "srf/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace srf::cli {

struct InitialPotential {
  enum class Family { Zero, Legendre, Nodal };
  Family family = Family::Zero;
  std::map<int, double> coefficients;  // Legendre degree -> coefficient
  std::string file;                    // nodal data (JSON array or object with "phi")
};

/// Cartesian grid of runs. An absent axis keeps the base value; an empty one
/// makes the grid empty.
struct SweepGrid {
  std::optional<std::vector<std::pair<double, double>>> slopes;  // (p_minus, p_plus)
  std::optional<std::vector<double>> amplitudes;  // initial potential = amplitude * P_degree
  int degree = 2;
};

struct RunConfig {
  std::string name = "custom";
  GeometryConfig geometry;
  InitialPotential initial;
  FlowConfig flow;
  std::uint64_t seed = 0;
  int n_threads = 0;
  int poincare_functions = 20;
  int spectrum_k = 8;
  NewtonConfig newton;
  std::vector<double> t_grid;  // empty: default continuity grid
  std::string out = "out";
  std::optional<SweepGrid> sweep;

  void validate() const;
  AnnotateOptions annotate_options() const;
};

const std::vector<std::string>& preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

/// Strict parse: unknown keys and wrong types are ConfigErrors naming the key
/// path and the line where it appears. Keys override `base`.
RunConfig parse_config(const std::string& text, const RunConfig& base = {});
RunConfig load_config(const std::string& path, const RunConfig& base = {});

Field initial_potential(const RunConfig& cfg, const GridPtr& grid);

/// Configuration echo for reports; parse_config(echo) reproduces every field
/// that affects results (out and n_threads are omitted).
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace srf::cli

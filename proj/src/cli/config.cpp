#include "srf/cli/config.hpp"

#include "srf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace srf::cli {

using nlohmann::json;

namespace {

// Line of the last path segment, found by walking "key": occurrences in order.
// Good enough for error context; falls back to 0 when a key cannot be located.
int key_line(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t hit = std::string::npos;
    for (std::size_t p = text.find(quoted, pos); p != std::string::npos; p = text.find(quoted, p + 1)) {
      std::size_t q = p + quoted.size();
      while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
      if (q < text.size() && text[q] == ':') {
        hit = p;
        break;
      }
    }
    if (hit == std::string::npos) return 0;
    pos = hit + quoted.size();
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::ostringstream os;
    os << "config";
    const int line = key_line(text_, path);
    if (line > 0) os << " line " << line;
    os << ", key '";
    for (std::size_t i = 0; i < path.size(); ++i) os << (i ? "." : "") << path[i];
    os << "': " << what;
    throw ConfigError(os.str());
  }

  using Handler = std::function<void(const json&, const std::vector<std::string>&)>;

  void object(const json& j, const std::vector<std::string>& path, const std::map<std::string, Handler>& keys) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : j.items()) {
      auto sub = path;
      sub.push_back(k);
      const auto it = keys.find(k);
      if (it == keys.end()) fail(sub, "unknown key");
      it->second(v, sub);
    }
  }

  double number(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  int integer(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
  }

  std::uint64_t unsigned_integer(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
  }

  bool boolean(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  std::string string(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  std::vector<double> numbers(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, path));
    return out;
  }

 private:
  const std::string& text_;
};

template <class T>
Reader::Handler set_number(const Reader& r, T& target) {
  return [&r, &target](const json& j, const auto& p) { target = r.number(j, p); };
}

Reader::Handler set_int(const Reader& r, int& target) {
  return [&r, &target](const json& j, const auto& p) { target = r.integer(j, p); };
}

Reader::Handler set_bool(const Reader& r, bool& target) {
  return [&r, &target](const json& j, const auto& p) { target = r.boolean(j, p); };
}

const char* scheme_name(Scheme s) { return s == Scheme::Imex ? "imex" : "explicit"; }

const char* gauge_name(GaugeMode g) {
  switch (g) {
    case GaugeMode::Auto: return "auto";
    case GaugeMode::None: return "none";
    case GaugeMode::Soliton: return "soliton";
  }
  return "auto";
}

const char* family_name(InitialPotential::Family f) {
  switch (f) {
    case InitialPotential::Family::Zero: return "zero";
    case InitialPotential::Family::Legendre: return "legendre";
    case InitialPotential::Family::Nodal: return "nodal";
  }
  return "zero";
}

void apply(const Reader& r, const json& root, RunConfig& c) {
  using H = Reader::Handler;
  const std::map<std::string, H> geometry{
      {"p_minus", set_number(r, c.geometry.p_minus)},
      {"p_plus", set_number(r, c.geometry.p_plus)},
      {"n", set_int(r, c.geometry.n)},
      {"weights",
       [&](const json& j, const auto& p) {
         const auto w = r.numbers(j, p);
         if (w.size() != 2 || !(w[0] > 0.0) || !(w[1] > 0.0)) r.fail(p, "expected two positive weights [a, b]");
         const int n = c.geometry.n;
         c.geometry = GeometryConfig::from_weights(w[0], w[1], n);
       }},
  };
  const std::map<std::string, H> initial{
      {"family",
       [&](const json& j, const auto& p) {
         const std::string f = r.string(j, p);
         if (f == "zero") c.initial.family = InitialPotential::Family::Zero;
         else if (f == "legendre") c.initial.family = InitialPotential::Family::Legendre;
         else if (f == "nodal") c.initial.family = InitialPotential::Family::Nodal;
         else r.fail(p, "expected zero, legendre or nodal");
       }},
      {"coefficients",
       [&](const json& j, const auto& p) {
         if (!j.is_object()) r.fail(p, "expected an object mapping degree to coefficient");
         c.initial.coefficients.clear();
         for (const auto& [k, v] : j.items()) {
           auto sub = p;
           sub.push_back(k);
           int degree = -1;
           try {
             std::size_t used = 0;
             degree = std::stoi(k, &used);
             if (used != k.size()) degree = -1;
           } catch (const std::exception&) {
           }
           if (degree < 0) r.fail(sub, "Legendre degree must be a non-negative integer");
           c.initial.coefficients[degree] = r.number(v, sub);
         }
       }},
      {"file", [&](const json& j, const auto& p) { c.initial.file = r.string(j, p); }},
  };
  FlowConfig& f = c.flow;
  const std::map<std::string, H> flow{
      {"t_end", set_number(r, f.t_end)},
      {"dt_init", set_number(r, f.dt_init)},
      {"dt_min", set_number(r, f.dt_min)},
      {"dt_max", set_number(r, f.dt_max)},
      {"rtol", set_number(r, f.rtol)},
      {"atol", set_number(r, f.atol)},
      {"sample_every", set_number(r, f.sample_every)},
      {"sample_grading", set_number(r, f.sample_grading)},
      {"sample_t0", set_number(r, f.sample_t0)},
      {"eps_pos", set_number(r, f.eps_pos)},
      {"converged_level", set_number(r, f.converged_level)},
      {"floor_level", set_number(r, f.floor_level)},
      {"flat_slope", set_number(r, f.flat_slope)},
      {"r2_min", set_number(r, f.r2_min)},
      {"early_stop", set_bool(r, f.early_stop)},
      {"stall_tol", set_number(r, f.stall_tol)},
      {"scheme",
       [&](const json& j, const auto& p) {
         const std::string s = r.string(j, p);
         if (s == "imex") f.scheme = Scheme::Imex;
         else if (s == "explicit") f.scheme = Scheme::ExplicitRk;
         else r.fail(p, "expected imex or explicit");
       }},
      {"gauge",
       [&](const json& j, const auto& p) {
         const std::string s = r.string(j, p);
         if (s == "auto") f.gauge = GaugeMode::Auto;
         else if (s == "none") f.gauge = GaugeMode::None;
         else if (s == "soliton") f.gauge = GaugeMode::Soliton;
         else r.fail(p, "expected auto, none or soliton");
       }},
  };
  const std::map<std::string, H> diagnostics{
      {"poincare_functions", set_int(r, c.poincare_functions)},
      {"spectrum_k", set_int(r, c.spectrum_k)},
  };
  const std::map<std::string, H> continuity{
      {"max_iter", set_int(r, c.newton.max_iter)},
      {"tol", set_number(r, c.newton.tol)},
      {"damping_floor", set_number(r, c.newton.damping_floor)},
      {"energy_steps", set_int(r, c.newton.energy_steps)},
      {"t_grid", [&](const json& j, const auto& p) { c.t_grid = r.numbers(j, p); }},
  };
  const std::map<std::string, H> sweep_keys{
      {"slopes",
       [&](const json& j, const auto& p) {
         if (!j.is_array()) r.fail(p, "expected an array of [p_minus, p_plus] pairs");
         c.sweep->slopes.emplace();
         for (const auto& pair : j) {
           const auto v = r.numbers(pair, p);
           if (v.size() != 2) r.fail(p, "each slope entry must be [p_minus, p_plus]");
           c.sweep->slopes->emplace_back(v[0], v[1]);
         }
       }},
      {"amplitudes", [&](const json& j, const auto& p) { c.sweep->amplitudes = r.numbers(j, p); }},
      {"degree", set_int(r, c.sweep->degree)},
  };
  const std::map<std::string, H> top{
      {"preset", [](const json&, const auto&) {}},  // applied before the other keys
      {"name", [&](const json& j, const auto& p) { c.name = r.string(j, p); }},
      {"geometry", [&](const json& j, const auto& p) { r.object(j, p, geometry); }},
      {"initial_potential", [&](const json& j, const auto& p) { r.object(j, p, initial); }},
      {"flow", [&](const json& j, const auto& p) { r.object(j, p, flow); }},
      {"diagnostics", [&](const json& j, const auto& p) { r.object(j, p, diagnostics); }},
      {"continuity", [&](const json& j, const auto& p) { r.object(j, p, continuity); }},
      {"sweep",
       [&](const json& j, const auto& p) {
         if (!c.sweep) c.sweep.emplace();
         r.object(j, p, sweep_keys);
       }},
      {"seed", [&](const json& j, const auto& p) { c.seed = r.unsigned_integer(j, p); }},
      {"n_threads", set_int(r, c.n_threads)},
      {"out", [&](const json& j, const auto& p) { c.out = r.string(j, p); }},
  };
  r.object(root, {}, top);
}

}  // namespace

void RunConfig::validate() const {
  geometry.validate();
  flow.validate();
  if (n_threads < 0) throw ConfigError("n_threads must be >= 0");
  if (poincare_functions < 0) throw ConfigError("diagnostics.poincare_functions must be >= 0");
  if (spectrum_k < 1 || spectrum_k > geometry.n / 4) throw ConfigError("diagnostics.spectrum_k must lie in [1, n/4]");
  if (initial.family == InitialPotential::Family::Nodal && initial.file.empty())
    throw ConfigError("initial_potential.file is required for the nodal family");
  if (sweep && sweep->degree < 0) throw ConfigError("sweep.degree must be >= 0");
  if (newton.energy_steps < 16) throw ConfigError("continuity.energy_steps must be >= 16");
}

AnnotateOptions RunConfig::annotate_options() const {
  AnnotateOptions o;
  o.seed = seed;
  o.poincare_functions = poincare_functions;
  o.spectrum_k = spectrum_k;
  o.n_threads = n_threads;
  return o;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"round", "perturbed-regular", "football-21"};
  return names;
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  if (name == "round") {
    c.flow.t_end = 5.0;
  } else if (name == "perturbed-regular") {
    c.initial.family = InitialPotential::Family::Legendre;
    c.initial.coefficients = {{2, 0.3}};
  } else if (name == "football-21") {
    c.geometry.p_minus = 2.0;
    c.geometry.p_plus = 1.0;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected round, perturbed-regular or football-21)");
  }
  return c;
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Message carries "line L, column C".
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const Reader r(text);
  RunConfig c = base;
  if (root.is_object() && root.contains("preset")) c = preset(r.string(root["preset"], {"preset"}));
  apply(r, root, c);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

Field initial_potential(const RunConfig& cfg, const GridPtr& grid) {
  using Family = InitialPotential::Family;
  switch (cfg.initial.family) {
    case Family::Zero: return Field::zeros(grid);
    case Family::Legendre: {
      int top = 0;
      for (const auto& [k, v] : cfg.initial.coefficients) top = std::max(top, k);
      Eigen::VectorXd c = Eigen::VectorXd::Zero(top + 1);
      for (const auto& [k, v] : cfg.initial.coefficients) c[k] = v;
      return from_legendre(grid, c);
    }
    case Family::Nodal: {
      std::ifstream in(cfg.initial.file);
      if (!in) throw ConfigError("cannot open nodal data file '" + cfg.initial.file + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("nodal data file '" + cfg.initial.file + "': " + e.what());
      }
      if (j.is_object() && j.contains("phi")) j = j["phi"];
      if (!j.is_array() || j.size() != static_cast<std::size_t>(grid->size()))
        throw ConfigError("nodal data file '" + cfg.initial.file + "' must hold " + std::to_string(grid->size()) +
                          " values");
      Eigen::VectorXd v(grid->size());
      for (int i = 0; i < grid->size(); ++i) {
        if (!j[i].is_number()) throw ConfigError("nodal data file '" + cfg.initial.file + "' has a non-number");
        v[i] = j[i].get<double>();
      }
      return Field(grid, v);
    }
  }
  throw ConfigError("unknown initial potential family");
}

// Execution settings (out, n_threads) are left out: they never change results.
json to_json(const RunConfig& c) {
  json coeffs = json::object();
  for (const auto& [k, v] : c.initial.coefficients) coeffs[std::to_string(k)] = v;
  json init{{"family", family_name(c.initial.family)}, {"coefficients", coeffs}};
  if (!c.initial.file.empty()) init["file"] = c.initial.file;
  const FlowConfig& f = c.flow;
  json j{
      {"name", c.name},
      {"geometry", {{"p_minus", c.geometry.p_minus}, {"p_plus", c.geometry.p_plus}, {"n", c.geometry.n}}},
      {"initial_potential", init},
      {"flow",
       {{"t_end", f.t_end},
        {"dt_init", f.dt_init},
        {"dt_min", f.dt_min},
        {"dt_max", f.dt_max},
        {"rtol", f.rtol},
        {"atol", f.atol},
        {"sample_every", f.sample_every},
        {"sample_grading", f.sample_grading},
        {"sample_t0", f.sample_t0},
        {"scheme", scheme_name(f.scheme)},
        {"gauge", gauge_name(f.gauge)},
        {"eps_pos", f.eps_pos},
        {"converged_level", f.converged_level},
        {"floor_level", f.floor_level},
        {"flat_slope", f.flat_slope},
        {"r2_min", f.r2_min},
        {"early_stop", f.early_stop},
        {"stall_tol", f.stall_tol}}},
      {"diagnostics", {{"poincare_functions", c.poincare_functions}, {"spectrum_k", c.spectrum_k}}},
      {"continuity",
       {{"max_iter", c.newton.max_iter},
        {"tol", c.newton.tol},
        {"damping_floor", c.newton.damping_floor},
        {"energy_steps", c.newton.energy_steps},
        {"t_grid", c.t_grid}}},
      {"seed", c.seed},
  };
  if (c.sweep) {
    json sw{{"degree", c.sweep->degree}};
    if (c.sweep->slopes) {
      json slopes = json::array();
      for (const auto& [a, b] : *c.sweep->slopes) slopes.push_back({a, b});
      sw["slopes"] = slopes;
    }
    if (c.sweep->amplitudes) sw["amplitudes"] = *c.sweep->amplitudes;
    j["sweep"] = sw;
  }
  return j;
}

}  // namespace srf::cli

#include "srf/cli/commands.hpp"

#include "srf/cli/serialize.hpp"
#include "srf/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace srf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

FitOutcome fit_series(const std::vector<double>& t, const std::vector<double>& v, double floor) {
  FitOutcome out;
  try {
    out.fit = fit_decay_rate(t, v, floor);
  } catch (const FitUnavailable& e) {
    out.reason = e.what();
  }
  return out;
}

json fit_json(const FitOutcome& f) {
  if (!f.fit) return {{"available", false}, {"reason", f.reason}};
  return {{"available", true},
          {"rate", number(f.fit->rate)},
          {"r2", number(f.fit->r2)},
          {"t_lo", f.fit->t_lo},
          {"t_hi", f.fit->t_hi},
          {"count", f.fit->count}};
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void apply_threads(const RunConfig& cfg) {
  if (cfg.n_threads > 0) omp_set_num_threads(cfg.n_threads);
}

}  // namespace

RunOutcome execute_run(const RunConfig& cfg) {
  cfg.validate();
  RunOutcome out;
  out.config = cfg;
  const BackgroundPtr bg = make_background(cfg.geometry);
  const Field phi0 = initial_potential(cfg, bg->grid);
  out.trajectory = run(phi0, bg, cfg.flow, cfg.annotate_options());
  const Trajectory& tr = out.trajectory;

  out.flags = condition_flags(tr.rows);
  std::vector<double> t, Y, W, u;
  for (const DiagnosticsRow& r : tr.rows) {
    t.push_back(r.t);
    Y.push_back(r.Y);
    W.push_back(r.W);
    u.push_back(r.u_sup);
  }
  // Floors keep the fits above round-off: Y and W are quadratic in u.
  out.fit_Y = fit_series(t, Y, 1e-24);
  out.fit_W = fit_series(t, W, 1e-24);
  out.fit_u = fit_series(t, u, 1e-12);

  out.final_spectrum = eigen_spectrum(tr.state(tr.size() - 1), cfg.spectrum_k);
  out.shi = shi_monitor(tr);
  out.equivalence = equivalence_monitor(tr);
  try {
    out.renormalization = renormalize_initial(tr, cfg.flow);
  } catch (const RenormalizationUnavailable& e) {
    out.renormalization_reason = e.what();
  }
  for (std::size_t i = 1; i + 1 < tr.size(); ++i) out.ydot_max = std::max(out.ydot_max, y_evolution_residual(tr, i));
  return out;
}

json run_report(const RunOutcome& out) {
  const Trajectory& tr = out.trajectory;
  const DiagnosticsRow& last = tr.rows.back();
  const double closed_gb = (tr.bg->p_minus + tr.bg->p_plus) / 2.0;

  double R_abs = 0, u_sup = 0, grad_u = 0, diam = 0, bk = 0, fut_spread = 0, gb = 0, vol = 0;
  double poincare = std::numeric_limits<double>::infinity(), lambda_min = poincare;
  for (const DiagnosticsRow& r : tr.rows) {
    R_abs = std::max({R_abs, std::abs(r.R_min), std::abs(r.R_max)});
    u_sup = std::max(u_sup, r.u_sup);
    grad_u = std::max(grad_u, r.grad_u_max);
    diam = std::max(diam, r.diam_T);
    bk = std::max(bk, r.bk_residual);
    fut_spread = std::max({fut_spread, std::abs(r.fut - r.fut_pairing), std::abs(r.fut - r.fut_curvature),
                           std::abs(r.fut_pairing - r.fut_curvature)});
    gb = std::max(gb, std::abs(r.gauss_bonnet - closed_gb));
    vol = std::max(vol, std::abs(r.vol - kVolume));
    poincare = std::min(poincare, r.poincare_slack);
    lambda_min = std::min(lambda_min, r.lambda_min);
  }

  const LimitVerdict& v = tr.verdict;
  json eigen = json::array();
  for (double e : out.final_spectrum.eigenvalues) eigen.push_back(e);

  json renorm;
  if (out.renormalization) {
    const Renormalization& r = *out.renormalization;
    renorm = {{"available", true},
              {"c0", r.c0},
              {"c0_direct", r.c0_direct},
              {"tail_fraction", r.tail_fraction},
              {"sup_phidot", r.sup_phidot},
              {"sup_u", r.sup_u}};
  } else {
    renorm = {{"available", false}, {"reason", out.renormalization_reason}};
  }

  return {
      {"version", kVersion},
      {"config", to_json(out.config)},
      {"samples", tr.size()},
      {"gauged", tr.gauged},
      {"verdict",
       {{"kind", to_string(v.kind)},
        {"rate", number(v.rate)},
        {"r2", number(v.r2)},
        {"level", number(v.level)},
        {"slope", number(v.slope)}}},
      {"rates", {{"Y", fit_json(out.fit_Y)}, {"W", fit_json(out.fit_W)}, {"u_sup", fit_json(out.fit_u)}}},
      {"flags",
       {{"M_proxy", out.flags.M_proxy},
        {"F", out.flags.F},
        {"T", out.flags.T},
        {"C_proxy", out.flags.C_proxy},
        {"mabuchi_tail", out.flags.mabuchi_tail},
        {"max_abs_fut", out.flags.max_abs_fut},
        {"min_lambda_lo", out.flags.min_lambda_lo},
        {"dim_hol_min", out.flags.dim_hol_min},
        {"dim_hol_max", out.flags.dim_hol_max}}},
      {"final",
       {{"t", last.t},
        {"u_sup", last.u_sup},
        {"R_min", last.R_min},
        {"R_max", last.R_max},
        {"fut", last.fut},
        {"Y", last.Y},
        {"W", last.W},
        {"nu", last.nu},
        {"lambda_lo", last.lambda_lo},
        {"lambda_hi", last.lambda_hi},
        {"dim_hol", last.dim_hol},
        {"eigenvalues", eigen}}},
      {"monitors",
       {{"perelman", {{"R_abs_max", R_abs}, {"u_sup_max", u_sup}, {"grad_u_max", grad_u}, {"diam_T_max", diam}}},
        {"shi", {{"sup_m1", out.shi.sup_m1}, {"sup_m2", out.shi.sup_m2}, {"K", out.shi.K}}},
        {"equivalence", {{"integral", out.equivalence.integral}, {"log_ratio", out.equivalence.log_ratio}}}}},
      {"identities",
       {{"bochner_kodaira_max", bk},
        {"ydot_max", out.ydot_max},
        {"futaki_spread", fut_spread},
        {"gauss_bonnet_max_dev", gb},
        {"volume_drift", vol},
        {"poincare_min_slack", number(poincare)},
        {"lambda_min", number(lambda_min)}}},
      {"renormalization", renorm},
  };
}

void write_run_artifacts(const RunOutcome& out, const std::string& dir) {
  ensure_dir(dir);
  std::ostringstream csv, snaps;
  write_csv(csv, out.trajectory.rows);
  write_snapshots(snaps, out.trajectory);
  write_text(path_in(dir, "diagnostics.csv"), csv.str());
  write_text(path_in(dir, "snapshots.jsonl"), snaps.str());
  write_json(path_in(dir, "report.json"), run_report(out));
}

int cmd_run(const RunConfig& cfg, std::ostream& log) {
  apply_threads(cfg);
  const RunOutcome out = execute_run(cfg);
  write_run_artifacts(out, cfg.out);
  const LimitVerdict& v = out.trajectory.verdict;
  log << cfg.name << ": " << to_string(v.kind) << " (rate " << v.rate << ", Y(t_end) " << v.level << ", "
      << out.trajectory.size() << " samples) -> " << cfg.out << '\n';
  return kExitOk;
}

json spectrum_json(const SpectrumReport& rep) {
  json clusters = json::array();
  for (const Cluster& c : rep.clusters) clusters.push_back({{"value", c.value}, {"multiplicity", c.multiplicity}});
  return {{"eigenvalues", rep.eigenvalues}, {"clusters", clusters},   {"nu", rep.nu},
          {"lambda_lo", rep.lambda_lo},     {"lambda_hi", rep.lambda_hi}, {"dim_hol", rep.dim_hol},
          {"osc_u", rep.osc_u}};
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const BackgroundPtr bg = make_background(cfg.geometry);
  const MetricState s = validate_state(initial_potential(cfg, bg->grid), bg, cfg.flow.eps_pos);
  const SpectrumReport rep = eigen_spectrum(s, cfg.spectrum_k);
  ensure_dir(cfg.out);
  json doc{{"version", kVersion}, {"config", to_json(cfg)}, {"spectrum", spectrum_json(rep)}};
  write_json(path_in(cfg.out, "spectrum.json"), doc);
  log << cfg.name << ": nu = " << rep.nu << ", dim_hol = " << rep.dim_hol << " -> " << cfg.out << '\n';
  return kExitOk;
}

json continuity_report(const ContinuityPath& path, const MetricState& ref) {
  const MonotonicityReport mono = path_monotonicity(path);
  const ContinuityPoint& end = path.points.back();
  json doc{{"points", path.points.size()},
           {"t_end", end.t},
           {"final_residual", end.residual},
           {"max_iterations", 0},
           {"monotonicity",
            {{"M_nonincreasing", mono.M_nonincreasing},
             {"IJ_nondecreasing", mono.IJ_nondecreasing},
             {"max_M_increase", mono.max_M_increase},
             {"max_IJ_decrease", mono.max_IJ_decrease},
             {"M_violations", mono.M_violations},
             {"IJ_violations", mono.IJ_violations}}},
           {"psi_end", std::vector<double>(end.psi.values().data(), end.psi.values().data() + end.psi.values().size())}};
  int iters = 0;
  for (const auto& p : path.points) iters = std::max(iters, p.iterations);
  doc["max_iterations"] = iters;
  if (end.t == 1.0) {
    // At t = 1 the target metric has R = kappa.
    const MetricState s = validate_state(ref.phi + end.psi, ref.bg);
    doc["einstein_defect"] = (s.R.values().array() - ref.bg->kappa).abs().maxCoeff();
  }
  return doc;
}

int cmd_continuity(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const BackgroundPtr bg = make_background(cfg.geometry);
  const MetricState ref = validate_state(initial_potential(cfg, bg->grid), bg, cfg.flow.eps_pos);
  const std::vector<double> grid = cfg.t_grid.empty() ? default_t_grid() : cfg.t_grid;
  ensure_dir(cfg.out);
  ContinuityPath path;
  int code = kExitOk;
  json doc{{"version", kVersion}, {"config", to_json(cfg)}};
  try {
    path = solve_path(ref, grid, cfg.newton);
  } catch (const PathTermination& e) {
    doc["terminated"] = {{"reason", e.what()}, {"last_good_t", e.last_good_t()}};
    log << cfg.name << ": continuity path terminated: " << e.what() << '\n';
    code = kExitNumeric;
  }
  std::ostringstream csv;
  csv << "t,iterations,residual,I,J,L,M\n";
  char buf[256];
  for (const ContinuityPoint& p : path.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t, p.iterations, p.residual,
                  p.energy.I, p.energy.J, p.energy.L, p.energy.M);
    csv << buf;
  }
  write_text(path_in(cfg.out, "continuity.csv"), csv.str());
  if (!path.points.empty()) doc["path"] = continuity_report(path, ref);
  write_json(path_in(cfg.out, "continuity.json"), doc);
  if (code == kExitOk)
    log << cfg.name << ": continuity path reached t = " << path.points.back().t << " (" << path.points.size()
        << " points) -> " << cfg.out << '\n';
  return code;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  apply_threads(cfg);
  const SweepGrid grid = cfg.sweep.value_or(SweepGrid{});
  const std::vector<std::pair<double, double>> slopes =
      grid.slopes.value_or(std::vector<std::pair<double, double>>{{cfg.geometry.p_minus, cfg.geometry.p_plus}});
  const std::vector<double> amps = grid.amplitudes.value_or(std::vector<double>{std::nan("")});

  std::vector<RunConfig> runs;
  for (const auto& [pm, pp] : slopes)
    for (double a : amps) {
      RunConfig c = cfg;
      c.sweep.reset();
      c.geometry.p_minus = pm;
      c.geometry.p_plus = pp;
      if (!std::isnan(a)) {
        c.initial = InitialPotential{};
        c.initial.family = InitialPotential::Family::Legendre;
        c.initial.coefficients = {{grid.degree, a}};
      }
      c.n_threads = 1;
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", runs.size());
      c.name = name;
      c.out = path_in(cfg.out, name);
      runs.push_back(std::move(c));
    }

  ensure_dir(cfg.out);
  std::vector<json> rows(runs.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(runs.size());
  // Runs are independent; nested regions inside a run execute on one thread.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const RunConfig& c = runs[static_cast<std::size_t>(i)];
    json row{{"run", c.name},
             {"p_minus", c.geometry.p_minus},
             {"p_plus", c.geometry.p_plus},
             {"amplitude", number(std::isnan(amps[static_cast<std::size_t>(i) % amps.size()])
                                      ? 0.0
                                      : amps[static_cast<std::size_t>(i) % amps.size()])}};
    try {
      const RunOutcome out = execute_run(c);
      write_run_artifacts(out, c.out);
      row["status"] = "ok";
      row["verdict"] = to_string(out.trajectory.verdict.kind);
      row["fut"] = number(out.trajectory.rows.back().fut);
      row["rate"] = out.fit_Y.fit ? number(out.fit_Y.fit->rate) : json("nan");
      row["r2"] = out.fit_Y.fit ? number(out.fit_Y.fit->r2) : json("nan");
      row["nu_inf"] = number(out.final_spectrum.nu);
      row["error"] = "";
    } catch (const std::exception& e) {
      row["status"] = "failed";
      row["verdict"] = "";
      row["fut"] = "nan";
      row["rate"] = "nan";
      row["r2"] = "nan";
      row["nu_inf"] = "nan";
      row["error"] = e.what();
    }
    rows[static_cast<std::size_t>(i)] = std::move(row);
  }

  const std::vector<std::string> cols{"run", "p_minus", "p_plus", "amplitude", "status", "verdict",
                                      "fut", "rate",    "r2",     "nu_inf",    "error"};
  std::ostringstream csv;
  for (std::size_t k = 0; k < cols.size(); ++k) csv << (k ? "," : "") << cols[k];
  csv << '\n';
  int failed = 0;
  for (const json& r : rows) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (k) csv << ',';
      const json& cell = r.at(cols[k]);
      if (cell.is_string()) {
        std::string s = cell.get<std::string>();
        std::replace(s.begin(), s.end(), ',', ';');
        std::replace(s.begin(), s.end(), '\n', ' ');
        csv << s;
      } else if (cell.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", cell.get<double>());
        csv << buf;
      } else {
        csv << cell.dump();
      }
    }
    csv << '\n';
    if (r.at("status") == "failed") ++failed;
  }
  write_text(path_in(cfg.out, "summary.csv"), csv.str());
  write_json(path_in(cfg.out, "summary.json"), json{{"version", kVersion}, {"runs", rows}});
  log << "sweep: " << rows.size() << " runs, " << failed << " failed -> " << cfg.out << '\n';
  return kExitOk;
}

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    log << "failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace srf::cli

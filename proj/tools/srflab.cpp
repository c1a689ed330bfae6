// srflab: numerical lab for the normalized transverse flow on U(1)-symmetric
// Sasaki 3-manifolds. Every flag can also come from SRFLAB_<FLAG>.

#include "srf/cli/check.hpp"
#include "srf/cli/commands.hpp"
#include "srf/cli/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string preset;
  std::optional<int> n_threads;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->envname("SRFLAB_CONFIG");
  cmd->add_option("--out", c.out, "output directory")->envname("SRFLAB_OUT");
  cmd->add_option("--preset", c.preset, "round | perturbed-regular | football-21")->envname("SRFLAB_PRESET");
  cmd->add_option("--n-threads", c.n_threads, "OpenMP threads (0: runtime default)")->envname("SRFLAB_N_THREADS");
  cmd->add_option("--seed", c.seed, "seed for randomized property checks")->envname("SRFLAB_SEED");
}

// preset < config file < flags / environment
srf::cli::RunConfig resolve(const Common& c) {
  srf::cli::RunConfig cfg = c.preset.empty() ? srf::cli::RunConfig{} : srf::cli::preset(c.preset);
  if (!c.config.empty()) cfg = srf::cli::load_config(c.config, cfg);
  if (!c.out.empty()) cfg.out = c.out;
  if (c.n_threads) cfg.n_threads = *c.n_threads;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"srflab - transverse flow laboratory"};
  app.set_version_flag("--version", std::string(srf::cli::kVersion));
  app.require_subcommand(1);

  Common run_opts, spectrum_opts, continuity_opts, sweep_opts, check_opts;
  auto* run = app.add_subcommand("run", "integrate the flow and write diagnostics.csv, snapshots.jsonl, report.json");
  auto* spectrum = app.add_subcommand("spectrum", "spectrum of the weighted Laplacian at the initial state");
  auto* continuity = app.add_subcommand("continuity", "follow the continuity path from the initial state");
  auto* sweep = app.add_subcommand("sweep", "run a grid of slopes and amplitudes concurrently");
  auto* check = app.add_subcommand("check", "run the identity suites and the reduction oracle");
  add_common(run, run_opts);
  add_common(spectrum, spectrum_opts);
  add_common(continuity, continuity_opts);
  add_common(sweep, sweep_opts);
  add_common(check, check_opts);

  double t_end_cap = 0.0;
  int grid_size = 0;
  bool no_cadence = false;
  std::string mutate = "none";
  check->add_option("--t-end-cap", t_end_cap, "shorten preset runs (quick check)")->envname("SRFLAB_T_END_CAP");
  check->add_option("--grid-size", grid_size, "override the preset grid size");
  check->add_flag("--no-cadence", no_cadence, "skip the half-cadence convergence runs");
  check->add_option("--mutate", mutate, "inject a defect: none | flip-curvature-sign")
      ->check(CLI::IsMember({"none", "flip-curvature-sign"}));

  CLI11_PARSE(app, argc, argv);

  using namespace srf::cli;
  auto& log = std::cerr;
  return guarded(log, [&]() -> int {
    if (run->parsed()) return cmd_run(resolve(run_opts), log);
    if (spectrum->parsed()) return cmd_spectrum(resolve(spectrum_opts), log);
    if (continuity->parsed()) return cmd_continuity(resolve(continuity_opts), log);
    if (sweep->parsed()) return cmd_sweep(resolve(sweep_opts), log);
    CheckOptions opts;
    opts.seed = check_opts.seed.value_or(0);
    opts.n_threads = check_opts.n_threads.value_or(0);
    opts.t_end_cap = t_end_cap;
    opts.grid_size = grid_size;
    opts.cadence = !no_cadence;
    opts.mutation = mutate == "flip-curvature-sign" ? Mutation::FlipCurvatureSign : Mutation::None;
    return cmd_check(opts, check_opts.out, std::cout);
  });
}

// irs_crlb: runs scheme x power sweeps and writes results.csv, convergence.csv
// and config.json for plotting.
//
//   irs_crlb run --config sweep.cfg --output out/ --threads 4 -v
//   irs_crlb crlb --scenario reference.scenario --power-dbm 30
//   irs_crlb scenario              # print the canonical reference scenario

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "irscrlb/experiment.hpp"
#include "irscrlb/kv_config.hpp"

namespace fs = std::filesystem;
using namespace irscrlb;

namespace {

enum ExitCode { kOk = 0, kSolverFailure = 1, kConfigError = 2, kRuntimeError = 3 };

// Relative config names are looked up in the working directory first and then
// in $IRSCRLB_CONFIG_DIR.
fs::path resolve_config(const std::string& name) {
  fs::path p(name);
  if (p.is_absolute() || fs::exists(p)) return p;
  if (const char* dir = std::getenv("IRSCRLB_CONFIG_DIR"); dir && *dir) {
    fs::path alt = fs::path(dir) / p;
    if (fs::exists(alt)) return alt;
  }
  return p;
}

int run_sweep(const std::string& config_name, const std::optional<std::string>& output,
              const std::optional<std::uint64_t>& seed, const std::optional<int>& threads, int verbosity,
              bool no_timing) {
  ExperimentConfig cfg = load_experiment_config(resolve_config(config_name));
  if (output) cfg.output_dir = *output;
  if (seed) cfg.master_seed = *seed;
  if (threads) cfg.threads = *threads;
  if (no_timing) cfg.record_timing = false;
  cfg.validate();

  const auto powers = cfg.sweep.points();
  if (verbosity > 0) {
    std::cerr << "scenario hash " << scenario_hash(cfg.scenario) << ", " << cfg.schemes.size() << " scheme(s), "
              << powers.size() << " power point(s), " << cfg.num_channel_draws << " draw(s), "
              << cfg.num_mc_trials << " MC trial(s), " << cfg.threads << " thread(s)\n";
  }
  std::mutex io;
  auto progress = [&](int done, int total) {
    if (verbosity <= 0) return;
    std::lock_guard lock(io);
    std::cerr << "  [" << done << "/" << total << "] sweep points done\n";
  };
  const ExperimentResult result = run_experiment(cfg, progress);
  write_experiment(cfg, result);

  if (verbosity > 1) {
    for (const auto& r : result.rows) {
      std::cerr << "  " << to_string(r.scheme) << " P0=" << format_double(r.p0_dbm) << " dBm draw "
                << r.channel_draw << ": crlb=" << format_double(r.crlb_rad2)
                << " mse=" << format_double(r.mse_rad2) << " [" << to_string(r.status) << "]\n";
    }
  }
  int flagged = 0;
  for (const auto& r : result.rows) flagged += r.status != RowStatus::ok;
  if (verbosity > 0 || flagged > 0) {
    std::cerr << result.rows.size() << " row(s) written to " << cfg.output_dir.string() << "; " << flagged
              << " flagged, " << result.solver_failures << " solver failure(s)\n";
  }
  return result.solver_failures > 0 ? kSolverFailure : kOk;
}

int print_crlb(const std::optional<std::string>& scenario_name, std::optional<double> power_dbm, std::uint64_t draw,
               const std::optional<std::uint64_t>& seed) {
  Scenario s = scenario_name ? load_scenario(resolve_config(*scenario_name)) : reference_scenario();
  if (power_dbm) s.power_budget_w = dbm_to_watts(*power_dbm);
  s.validate();
  const std::uint64_t master = seed.value_or(s.rng_seed);
  Rng channel_rng = derive_rng(master, {1, draw});
  const auto channel = generate_channel(s, channel_rng);
  const auto designs =
      design_schemes(s, channel, channel.theta, kAllSchemes, derive_rng(master, {2})(), draw);
  std::cout << "theta_rad " << format_double(channel.theta) << "\n";
  int failures = 0;
  for (const auto& d : designs) {
    std::cout << to_string(d.scheme) << " crlb_rad2 " << format_double(d.crlb.value_or_inf()) << " outer_iters "
              << d.outer_iterations << "\n";
    failures += d.solver_failures;
  }
  return failures > 0 ? kSolverFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRLB-minimizing transmit and reflect beamforming for IRS-aided NLoS DoA sensing"};
  app.require_subcommand(1);

  std::string config_name = "experiment.cfg";
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  int verbosity = 0;
  bool no_timing = false;
  auto* run = app.add_subcommand("run", "Run a scheme x power sweep");
  run->add_option("-c,--config", config_name, "Experiment config; relative names also searched in $IRSCRLB_CONFIG_DIR")
      ->capture_default_str();
  run->add_option("-o,--output", output, "Output directory (overrides output_dir)");
  run->add_option("-s,--seed", seed, "Master seed (overrides master_seed)");
  run->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("-v,--verbose", verbosity, "Progress on stderr; repeat for per-row output");
  run->add_flag("--no-timing", no_timing, "Write 0 to wall_time_s so reruns are byte-identical");

  std::optional<std::string> scenario_name;
  std::optional<double> power_dbm;
  std::uint64_t draw = 0;
  std::optional<std::uint64_t> crlb_seed;
  auto* crlb = app.add_subcommand("crlb", "Design all schemes for one channel draw and print their CRLBs");
  crlb->add_option("--scenario", scenario_name, "Scenario file (default: the reference deployment)");
  crlb->add_option("-p,--power-dbm", power_dbm, "Transmit power budget in dBm");
  crlb->add_option("-d,--draw", draw, "Channel draw index")->capture_default_str();
  crlb->add_option("-s,--seed", crlb_seed, "Master seed (default: the scenario's rng_seed)");

  auto* show = app.add_subcommand("scenario", "Print a scenario in canonical key-value form");
  std::optional<std::string> show_name;
  show->add_option("file", show_name, "Scenario file (default: the reference deployment)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_sweep(config_name, output, seed, threads, verbosity, no_timing);
    if (*crlb) return print_crlb(scenario_name, power_dbm, draw, crlb_seed);
    if (*show) {
      std::cout << serialize_scenario(show_name ? load_scenario(resolve_config(*show_name)) : reference_scenario());
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "irs_crlb: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "irs_crlb: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "irscrlb/evaluator.hpp"
#include "irscrlb/optimizer.hpp"
#include "irscrlb/scenario.hpp"

namespace irscrlb {

struct PowerSweep {
  double start_dbm = 10.0;
  double stop_dbm = 40.0;
  double step_dbm = 5.0;

  /// start, start + step, ... up to stop (inclusive, with a small tolerance).
  std::vector<double> points() const;
};

struct ExperimentConfig {
  std::filesystem::path scenario_path;  // empty: the reference scenario
  Scenario scenario = reference_scenario();
  std::vector<Scheme> schemes{kAllSchemes.begin(), kAllSchemes.end()};
  PowerSweep sweep;
  int num_channel_draws = 1;
  int num_mc_trials = 300;  // 0 skips the Monte Carlo stage
  std::filesystem::path output_dir = "results";
  std::uint64_t master_seed = 1;
  int threads = 1;
  double assumed_theta_offset_rad = 0.0;
  OptimizerOptions optimizer;
  MleOptions mle;
  bool record_timing = true;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Key-value experiment file. A relative `scenario` path is resolved against
/// `base_dir`; without `master_seed` the scenario's rng_seed is used.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

enum class RowStatus { ok, not_converged, not_identifiable, solver_failure };
std::string_view to_string(RowStatus status);
RowStatus parse_row_status(std::string_view label);

struct ResultRow {
  Scheme scheme = Scheme::crlb_min;
  double p0_dbm = 0.0;
  int channel_draw = 0;
  double crlb_rad2 = 0.0;   // +inf when unbounded
  double mse_rad2 = 0.0;    // nan when the Monte Carlo stage is skipped
  double mse_stderr = 0.0;
  int outer_iters = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  RowStatus status = RowStatus::ok;
  std::uint64_t scenario_hash = 0;

  bool operator==(const ResultRow&) const;
};

struct TraceRow {
  Scheme scheme = Scheme::crlb_min;
  double p0_dbm = 0.0;
  int channel_draw = 0;
  int outer_iter = 0;
  double crlb_rad2 = 0.0;

  bool operator==(const TraceRow&) const;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;     // ordered by (scheme, power, draw)
  std::vector<TraceRow> traces;    // same order, then outer_iter
  int solver_failures = 0;
  double max_relative_gap = 0.0;  // over every SDP solved in the run
};

/// Scheme x power x draw sweep. Work is spread over `threads` workers; the
/// output order and content do not depend on the thread count.
/// `progress`, if set, is called from worker threads after each task.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(int done, int total)>& progress = {});

inline constexpr std::string_view kResultsHeader =
    "scheme,P0_dBm,channel_draw,crlb_rad2,mse_rad2,mse_stderr,outer_iters,wall_time_s,seed,status,scenario_hash";
inline constexpr std::string_view kConvergenceHeader = "scheme,P0_dBm,channel_draw,outer_iter,crlb_rad2";

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_convergence_csv(std::ostream& out, const std::vector<TraceRow>& rows);
/// Throw std::runtime_error on malformed input.
std::vector<ResultRow> read_results_csv(std::istream& in);
std::vector<TraceRow> read_convergence_csv(std::istream& in);

/// The fully resolved configuration, including the scenario, as JSON.
std::string config_json(const ExperimentConfig& config);

/// Writes results.csv, convergence.csv and config.json into config.output_dir.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace irscrlb

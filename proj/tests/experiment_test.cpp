#include "irscrlb/experiment.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "irscrlb/kv_config.hpp"

namespace irscrlb {
namespace {

namespace fs = std::filesystem;

std::string key_of(std::string_view text, const fs::path& base = {}) {
  try {
    parse_experiment_config(text, base);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("irscrlb_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.schemes = {Scheme::crlb_min};
  c.sweep = {30.0, 30.0, 5.0};
  c.num_mc_trials = 0;
  c.record_timing = false;
  return c;
}

std::string results_text(const ExperimentResult& r) {
  std::ostringstream os;
  write_results_csv(os, r.rows);
  write_convergence_csv(os, r.traces);
  return os.str();
}

TEST(PowerSweep, InclusiveEndpoints) {
  EXPECT_EQ((PowerSweep{10, 40, 5}.points()), (std::vector<double>{10, 15, 20, 25, 30, 35, 40}));
  EXPECT_EQ((PowerSweep{30, 30, 5}.points()), (std::vector<double>{30}));
  EXPECT_EQ(PowerSweep({0, 1, 0.1}).points().size(), 11u);
  EXPECT_TRUE(PowerSweep({0, 1, 0}).points().empty());
}

TEST(ExperimentConfig, ParsesAllKeys) {
  const auto c = parse_experiment_config(
      "schemes = snr_max, crlb_min\npower_start_dbm = -10\npower_stop_dbm = 20\npower_step_dbm = 10\n"
      "channel_draws = 3\nmc_trials = 80\noutput_dir = out\nmaster_seed = 99\nthreads = 2\n"
      "assumed_theta_offset_deg = 1\nmax_outer = 7\nouter_tol = 1e-4\nsca_max_iterations = 20\n"
      "sca_rel_tol = 1e-5\nrandomization_samples = 50\nmle_grid_step = 2e-3\nmle_refine_iters = 30\n");
  EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::snr_max, Scheme::crlb_min}));
  EXPECT_EQ(c.sweep.points().size(), 4u);
  EXPECT_EQ(c.num_channel_draws, 3);
  EXPECT_EQ(c.num_mc_trials, 80);
  EXPECT_EQ(c.output_dir, fs::path("out"));
  EXPECT_EQ(c.master_seed, 99u);
  EXPECT_EQ(c.threads, 2);
  EXPECT_NEAR(c.assumed_theta_offset_rad, kPi / 180, 1e-15);
  EXPECT_EQ(c.optimizer.max_outer, 7);
  EXPECT_EQ(c.optimizer.outer_tol, 1e-4);
  EXPECT_EQ(c.optimizer.reflect.sca.max_iterations, 20);
  EXPECT_EQ(c.optimizer.reflect.sca.rel_tol, 1e-5);
  EXPECT_EQ(c.optimizer.reflect.randomization_samples, 50);
  EXPECT_EQ(c.mle.grid_step, 2e-3);
  EXPECT_EQ(c.mle.refine_iters, 30);
}

TEST(ExperimentConfig, SeedDefaultsToScenario) {
  TempDir tmp;
  Scenario s = reference_scenario();
  s.rng_seed = 4242;
  std::ofstream(tmp.path / "a.scenario") << serialize_scenario(s);
  const auto c = parse_experiment_config("scenario = a.scenario\n", tmp.path);
  EXPECT_EQ(c.master_seed, 4242u);
  EXPECT_EQ(scenario_hash(c.scenario), scenario_hash(s));
  EXPECT_EQ(c.scenario_path, tmp.path / "a.scenario");
}

TEST(ExperimentConfig, ErrorsNameTheKey) {
  EXPECT_EQ(key_of("colour = red\n"), "colour");
  EXPECT_EQ(key_of("schemes = crlb_min, best\n"), "schemes");
  EXPECT_EQ(key_of("schemes = crlb_min, crlb_min\n"), "schemes");
  EXPECT_EQ(key_of("mc_trials = 10\n"), "mc_trials");
  EXPECT_EQ(key_of("mc_trials = -1\n"), "mc_trials");
  EXPECT_EQ(key_of("power_step_dbm = 0\n"), "power_step_dbm");
  EXPECT_EQ(key_of("power_start_dbm = 50\n"), "power_stop_dbm");
  EXPECT_EQ(key_of("channel_draws = 0\n"), "channel_draws");
  EXPECT_EQ(key_of("threads = many\n"), "threads");
  EXPECT_EQ(key_of("scenario = /nonexistent/x.scenario\n"), "scenario");
  EXPECT_EQ(key_of("master_seed = 1\nmaster_seed = 2\n"), "master_seed");
  EXPECT_EQ(key_of("mc_trials = 50\n"), "<none>");
}

TEST(ExperimentConfig, ScenarioErrorsAreReported) {
  TempDir tmp;
  std::ofstream(tmp.path / "bad.scenario") << "num_ap_antennas = 1\n";
  try {
    parse_experiment_config("scenario = bad.scenario\n", tmp.path);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "scenario");
    EXPECT_NE(std::string(e.what()).find("num_ap_antennas"), std::string::npos);
  }
}

TEST(RunExperiment, OneSchemeOnePointOneDraw) {
  const auto cfg = quick_config();
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.rows.size(), 1u);
  const auto& row = r.rows[0];
  EXPECT_EQ(row.scheme, Scheme::crlb_min);
  EXPECT_EQ(row.p0_dbm, 30.0);
  EXPECT_EQ(row.channel_draw, 0);
  EXPECT_TRUE(std::isfinite(row.crlb_rad2));
  EXPECT_TRUE(std::isnan(row.mse_rad2));
  EXPECT_EQ(row.status, RowStatus::ok);
  EXPECT_EQ(row.scenario_hash, scenario_hash(cfg.scenario));
  EXPECT_EQ(r.solver_failures, 0);
  // One trace: initial point plus one entry per outer iteration.
  ASSERT_EQ(r.traces.size(), static_cast<std::size_t>(row.outer_iters) + 1);
  for (std::size_t k = 0; k < r.traces.size(); ++k) {
    EXPECT_EQ(r.traces[k].outer_iter, static_cast<int>(k));
    if (k > 0) EXPECT_LE(r.traces[k].crlb_rad2, r.traces[k - 1].crlb_rad2 * (1 + 1e-8));
  }
  EXPECT_EQ(r.traces.back().crlb_rad2, row.crlb_rad2);
}

TEST(RunExperiment, RowOrderIsSchemePowerDraw) {
  auto cfg = quick_config();
  cfg.schemes = {Scheme::transmit_only, Scheme::crlb_min};
  cfg.sweep = {20.0, 30.0, 10.0};
  cfg.num_channel_draws = 2;
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.rows.size(), 8u);
  std::size_t i = 0;
  for (Scheme s : cfg.schemes)
    for (double p : {20.0, 30.0})
      for (int d = 0; d < 2; ++d, ++i) {
        EXPECT_EQ(r.rows[i].scheme, s);
        EXPECT_EQ(r.rows[i].p0_dbm, p);
        EXPECT_EQ(r.rows[i].channel_draw, d);
      }
}

TEST(RunExperiment, ByteIdenticalAcrossRerunsAndThreadCounts) {
  auto cfg = quick_config();
  cfg.schemes = {kAllSchemes.begin(), kAllSchemes.end()};
  cfg.sweep = {20.0, 30.0, 10.0};
  cfg.num_channel_draws = 2;
  cfg.num_mc_trials = 50;
  const std::string a = results_text(run_experiment(cfg));
  const std::string b = results_text(run_experiment(cfg));
  cfg.threads = 3;
  const std::string c = results_text(run_experiment(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  cfg.master_seed = 2;
  EXPECT_NE(a, results_text(run_experiment(cfg)));
}

TEST(RunExperiment, CrlbMinDecreasesWithPower) {
  auto cfg = quick_config();
  cfg.sweep = {10.0, 40.0, 5.0};
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.rows.size(), 7u);
  for (std::size_t k = 1; k < r.rows.size(); ++k) EXPECT_LT(r.rows[k].crlb_rad2, r.rows[k - 1].crlb_rad2);
}

TEST(RunExperiment, NonIdentifiableRowsAreFlagged) {
  auto cfg = quick_config();
  cfg.scenario.rician_factor = std::numeric_limits<double>::infinity();
  cfg.schemes = {kAllSchemes.begin(), kAllSchemes.end()};
  cfg.num_mc_trials = 50;
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.status, RowStatus::not_identifiable);
    EXPECT_TRUE(std::isinf(row.crlb_rad2));
    EXPECT_TRUE(std::isnan(row.mse_rad2));
  }
  EXPECT_EQ(r.solver_failures, 0);
}

TEST(RunExperiment, ProgressCountsEveryTask) {
  auto cfg = quick_config();
  cfg.sweep = {10.0, 30.0, 10.0};
  cfg.num_channel_draws = 2;
  int last = 0, total = 0;
  run_experiment(cfg, [&](int done, int n) {
    last = std::max(last, done);
    total = n;
  });
  EXPECT_EQ(total, 6);
  EXPECT_EQ(last, 6);
}

TEST(ResultsCsv, RoundTripsExactly) {
  std::vector<ResultRow> rows(3);
  rows[0] = {Scheme::snr_max, 12.5, 3, 1.0 / 3.0, 0.1 + 0.2, 1e-300, 4, 0.125, 18446744073709551615ull,
             RowStatus::not_converged, 7};
  rows[1] = {Scheme::reflective_only, -10, 0, std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0, 0.0, 0,
             RowStatus::not_identifiable, 0};
  rows[2].status = RowStatus::solver_failure;
  std::stringstream ss;
  write_results_csv(ss, rows);
  EXPECT_EQ(read_results_csv(ss), rows);

  std::vector<TraceRow> traces{{Scheme::crlb_min, 30, 1, 0, 2.5e-4}, {Scheme::crlb_min, 30, 1, 1, 1.0 / 7.0}};
  std::stringstream ts;
  write_convergence_csv(ts, traces);
  EXPECT_EQ(read_convergence_csv(ts), traces);
}

TEST(ResultsCsv, RejectsMalformedInput) {
  std::istringstream no_header("");
  EXPECT_THROW(read_results_csv(no_header), std::runtime_error);
  std::istringstream wrong_header("scheme,P0\n");
  EXPECT_THROW(read_results_csv(wrong_header), std::runtime_error);
  std::istringstream short_row(std::string(kResultsHeader) + "\ncrlb_min,30\n");
  EXPECT_THROW(read_results_csv(short_row), std::runtime_error);
  std::istringstream bad_number(std::string(kConvergenceHeader) + "\ncrlb_min,30,0,1,abc\n");
  EXPECT_THROW(read_convergence_csv(bad_number), std::runtime_error);
  std::istringstream bad_scheme(std::string(kConvergenceHeader) + "\nbest,30,0,1,1\n");
  EXPECT_THROW(read_convergence_csv(bad_scheme), std::exception);
}

TEST(WriteExperiment, EmitsTablesAndSidecar) {
  TempDir tmp;
  auto cfg = quick_config();
  cfg.output_dir = tmp.path / "nested" / "out";
  const auto r = run_experiment(cfg);
  write_experiment(cfg, r);
  std::ifstream results(cfg.output_dir / "results.csv");
  EXPECT_EQ(read_results_csv(results), r.rows);
  std::ifstream traces(cfg.output_dir / "convergence.csv");
  EXPECT_EQ(read_convergence_csv(traces), r.traces);
  const std::string json = read_text_file(cfg.output_dir / "config.json");
  EXPECT_NE(json.find("\"master_seed\": 1"), std::string::npos);
  EXPECT_NE(json.find("\"scenario_hash\": " + std::to_string(scenario_hash(cfg.scenario))), std::string::npos);
  EXPECT_NE(json.find("\"crlb_min\""), std::string::npos);
}

}  // namespace
}  // namespace irscrlb

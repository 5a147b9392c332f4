#include "irscrlb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "irscrlb/kv_config.hpp"

namespace irscrlb {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

double parse_double_cell(const std::string& s) {
  if (s == "nan") return kNan;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::runtime_error("malformed number '" + s + "'");
  }
  return out;
}

template <class Int>
Int parse_int_cell(const std::string& s) {
  Int out{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::runtime_error("malformed integer '" + s + "'");
  }
  return out;
}

// nan compares unequal to itself, which would make round-trip checks useless.
bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

template <class Row>
std::vector<Row> read_csv(std::istream& in, std::string_view header, std::size_t width,
                          const std::function<Row(const std::vector<std::string>&)>& convert) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::runtime_error("unexpected header '" + line + "'");
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != width) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                               " fields, got " + std::to_string(cells.size()));
    }
    try {
      rows.push_back(convert(cells));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

RowStatus status_of(const JointDesign& d) {
  if (!d.identifiable) return RowStatus::not_identifiable;
  if (d.solver_failures > 0) return RowStatus::solver_failure;
  if (d.scheme == Scheme::crlb_min && !d.converged) return RowStatus::not_converged;
  return RowStatus::ok;
}

// Runs f(i) for i in [0, n) on `threads` workers. The first exception is
// rethrown after all workers have stopped.
void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  threads = std::clamp(threads, 1, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n && !stop; i = next++) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<double> PowerSweep::points() const {
  std::vector<double> out;
  if (!(step_dbm > 0.0) || stop_dbm < start_dbm) return out;
  const double slack = 1e-9 * std::max(1.0, std::abs(step_dbm));
  for (int k = 0;; ++k) {
    const double p = start_dbm + k * step_dbm;
    if (p > stop_dbm + slack) break;
    out.push_back(p);
  }
  return out;
}

void ExperimentConfig::validate() const {
  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario", e.what());
  }
  if (schemes.empty()) throw ConfigError("schemes", "must name at least one scheme");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    for (std::size_t j = i + 1; j < schemes.size(); ++j) {
      if (schemes[i] == schemes[j]) throw ConfigError("schemes", "duplicate scheme " + std::string(to_string(schemes[i])));
    }
  }
  if (!std::isfinite(sweep.start_dbm)) throw ConfigError("power_start_dbm", "must be finite");
  if (!std::isfinite(sweep.stop_dbm)) throw ConfigError("power_stop_dbm", "must be finite");
  if (!(sweep.step_dbm > 0.0) || !std::isfinite(sweep.step_dbm)) throw ConfigError("power_step_dbm", "must be > 0");
  if (sweep.stop_dbm < sweep.start_dbm) throw ConfigError("power_stop_dbm", "must be >= power_start_dbm");
  if (num_channel_draws < 1) throw ConfigError("channel_draws", "must be >= 1");
  if (num_mc_trials != 0 && num_mc_trials < 50) throw ConfigError("mc_trials", "must be 0 (skip) or >= 50");
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
  if (!std::isfinite(assumed_theta_offset_rad)) throw ConfigError("assumed_theta_offset_deg", "must be finite");
  if (optimizer.max_outer < 1) throw ConfigError("max_outer", "must be >= 1");
  if (!(optimizer.outer_tol > 0.0)) throw ConfigError("outer_tol", "must be > 0");
  if (optimizer.reflect.sca.max_iterations < 1) throw ConfigError("sca_max_iterations", "must be >= 1");
  if (!(optimizer.reflect.sca.rel_tol > 0.0)) throw ConfigError("sca_rel_tol", "must be > 0");
  if (optimizer.reflect.randomization_samples < 1) throw ConfigError("randomization_samples", "must be >= 1");
  if (!(mle.grid_step > 0.0) || mle.grid_step > kPi) throw ConfigError("mle_grid_step", "must be in (0, pi]");
  if (mle.refine_iters < 0) throw ConfigError("mle_refine_iters", "must be >= 0");
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  bool have_seed = false;
  auto positive_int = [](const KvEntry& e) {
    const auto v = kv_to_int(e);
    if (v < 0 || v > std::numeric_limits<int>::max()) throw ConfigError(e.key, "out of range");
    return static_cast<int>(v);
  };
  const std::map<std::string, std::function<void(const KvEntry&)>, std::less<>> handlers{
      {"scenario", [&](const KvEntry& e) {
         if (e.value.empty()) throw ConfigError(e.key, "empty path");
         std::filesystem::path p(e.value);
         if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
         c.scenario_path = p;
         try {
           c.scenario = load_scenario(p);
         } catch (const ConfigError& inner) {
           throw ConfigError(e.key, p.string() + ": " + inner.what());
         } catch (const std::exception& inner) {
           throw ConfigError(e.key, inner.what());
         }
       }},
      {"schemes", [&](const KvEntry& e) {
         c.schemes.clear();
         for (const auto& label : kv_to_list(e)) {
           try {
             c.schemes.push_back(parse_scheme(label));
           } catch (const std::invalid_argument&) {
             throw ConfigError(e.key, "unknown scheme '" + label + "'");
           }
         }
       }},
      {"power_start_dbm", [&](const KvEntry& e) { c.sweep.start_dbm = kv_to_double(e); }},
      {"power_stop_dbm", [&](const KvEntry& e) { c.sweep.stop_dbm = kv_to_double(e); }},
      {"power_step_dbm", [&](const KvEntry& e) { c.sweep.step_dbm = kv_to_double(e); }},
      {"channel_draws", [&](const KvEntry& e) { c.num_channel_draws = positive_int(e); }},
      {"mc_trials", [&](const KvEntry& e) { c.num_mc_trials = positive_int(e); }},
      {"output_dir", [&](const KvEntry& e) {
         if (e.value.empty()) throw ConfigError(e.key, "empty path");
         c.output_dir = e.value;
       }},
      {"master_seed", [&](const KvEntry& e) { c.master_seed = kv_to_uint(e); have_seed = true; }},
      {"threads", [&](const KvEntry& e) { c.threads = positive_int(e); }},
      {"assumed_theta_offset_deg", [&](const KvEntry& e) { c.assumed_theta_offset_rad = kv_to_double(e) * kPi / 180.0; }},
      {"max_outer", [&](const KvEntry& e) { c.optimizer.max_outer = positive_int(e); }},
      {"outer_tol", [&](const KvEntry& e) { c.optimizer.outer_tol = kv_to_double(e); }},
      {"sca_max_iterations", [&](const KvEntry& e) { c.optimizer.reflect.sca.max_iterations = positive_int(e); }},
      {"sca_rel_tol", [&](const KvEntry& e) { c.optimizer.reflect.sca.rel_tol = kv_to_double(e); }},
      {"randomization_samples", [&](const KvEntry& e) { c.optimizer.reflect.randomization_samples = positive_int(e); }},
      {"mle_grid_step", [&](const KvEntry& e) { c.mle.grid_step = kv_to_double(e); }},
      {"mle_refine_iters", [&](const KvEntry& e) { c.mle.refine_iters = positive_int(e); }},
  };
  for (const auto& e : parse_kv(text)) {
    const auto it = handlers.find(e.key);
    if (it == handlers.end()) throw ConfigError(e.key, "unknown key");
    it->second(e);
  }
  if (!have_seed) c.master_seed = c.scenario.rng_seed;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text_file(path), path.parent_path());
}

std::string_view to_string(RowStatus status) {
  switch (status) {
    case RowStatus::ok: return "ok";
    case RowStatus::not_converged: return "not_converged";
    case RowStatus::not_identifiable: return "not_identifiable";
    case RowStatus::solver_failure: return "solver_failure";
  }
  return "?";
}

RowStatus parse_row_status(std::string_view label) {
  for (auto s : {RowStatus::ok, RowStatus::not_converged, RowStatus::not_identifiable, RowStatus::solver_failure}) {
    if (to_string(s) == label) return s;
  }
  throw std::invalid_argument("unknown row status '" + std::string(label) + "'");
}

bool ResultRow::operator==(const ResultRow& o) const {
  return scheme == o.scheme && same(p0_dbm, o.p0_dbm) && channel_draw == o.channel_draw &&
         same(crlb_rad2, o.crlb_rad2) && same(mse_rad2, o.mse_rad2) && same(mse_stderr, o.mse_stderr) &&
         outer_iters == o.outer_iters && same(wall_time_s, o.wall_time_s) && seed == o.seed && status == o.status &&
         scenario_hash == o.scenario_hash;
}

bool TraceRow::operator==(const TraceRow& o) const {
  return scheme == o.scheme && same(p0_dbm, o.p0_dbm) && channel_draw == o.channel_draw &&
         outer_iter == o.outer_iter && same(crlb_rad2, o.crlb_rad2);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::function<void(int, int)>& progress) {
  config.validate();
  const auto powers = config.sweep.points();
  const int num_powers = static_cast<int>(powers.size());
  const int draws = config.num_channel_draws;
  const int num_schemes = static_cast<int>(config.schemes.size());
  const int tasks = num_powers * draws;
  const std::uint64_t hash = scenario_hash(config.scenario);
  const std::uint64_t design_seed = derive_rng(config.master_seed, {2})();
  const int mc_threads = std::max(1, config.threads / std::min(config.threads, tasks));

  // Indexed by (draw, power) then scheme; flattened into the output order below.
  std::vector<std::vector<ResultRow>> rows(tasks);
  std::vector<std::vector<std::vector<TraceRow>>> traces(tasks);
  std::vector<int> failures(tasks, 0);
  std::vector<double> gaps(tasks, 0.0);
  std::atomic<int> done{0};

  parallel_for(tasks, config.threads, [&](int task) {
    const int draw = task / num_powers;
    const int pi = task % num_powers;
    Scenario scen = config.scenario;
    scen.power_budget_w = dbm_to_watts(powers[pi]);
    Rng channel_rng = derive_rng(config.master_seed, {1, static_cast<std::uint64_t>(draw)});
    const ChannelRealization channel = generate_channel(scen, channel_rng);
    const double assumed = channel.theta + config.assumed_theta_offset_rad;
    const auto designs = design_schemes(scen, channel, assumed, config.schemes, design_seed,
                                        static_cast<std::uint64_t>(draw), config.optimizer);

    auto& out = rows[task];
    auto& tr = traces[task];
    tr.resize(num_schemes);
    for (int si = 0; si < num_schemes; ++si) {
      const JointDesign& d = designs[si];
      ResultRow r;
      r.scheme = d.scheme;
      r.p0_dbm = powers[pi];
      r.channel_draw = draw;
      r.crlb_rad2 = d.crlb.value_or_inf();
      r.outer_iters = d.outer_iterations;
      r.wall_time_s = config.record_timing ? d.wall_time_s : 0.0;
      r.seed = derive_rng(config.master_seed, {3, static_cast<std::uint64_t>(draw),
                                               static_cast<std::uint64_t>(d.scheme), static_cast<std::uint64_t>(pi)})();
      r.status = status_of(d);
      r.scenario_hash = hash;
      r.mse_rad2 = kNan;
      r.mse_stderr = kNan;
      if (config.num_mc_trials > 0 && d.identifiable) {
        const auto start = std::chrono::steady_clock::now();
        try {
          const MsePoint mp = monte_carlo_mse(scen, channel, d, config.num_mc_trials, r.seed, mc_threads, config.mle);
          r.mse_rad2 = mp.mse;
          r.mse_stderr = mp.mse_stderr;
        } catch (const std::domain_error&) {
          // The design leaves no signal at the target; the row keeps nan.
        }
        if (config.record_timing) {
          r.wall_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
      }
      if (r.status == RowStatus::solver_failure) ++failures[task];
      gaps[task] = std::max(gaps[task], d.max_relative_gap);
      out.push_back(r);

      const auto& curve = d.outer_trace.empty() ? d.crlb_trace : d.outer_trace;
      for (std::size_t k = 0; k < curve.size(); ++k) {
        tr[si].push_back({d.scheme, powers[pi], draw, static_cast<int>(k), curve[k]});
      }
    }
    const int finished = ++done;
    if (progress) progress(finished, tasks);
  });

  ExperimentResult result;
  for (int si = 0; si < num_schemes; ++si) {
    for (int pi = 0; pi < num_powers; ++pi) {
      for (int draw = 0; draw < draws; ++draw) {
        const int task = draw * num_powers + pi;
        result.rows.push_back(rows[task][si]);
        const auto& t = traces[task][si];
        result.traces.insert(result.traces.end(), t.begin(), t.end());
      }
    }
  }
  for (int f : failures) result.solver_failures += f;
  for (double g : gaps) result.max_relative_gap = std::max(result.max_relative_gap, g);
  return result;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.scheme) << ',' << format_double(r.p0_dbm) << ',' << r.channel_draw << ','
        << format_double(r.crlb_rad2) << ',' << format_double(r.mse_rad2) << ',' << format_double(r.mse_stderr) << ','
        << r.outer_iters << ',' << format_double(r.wall_time_s) << ',' << r.seed << ',' << to_string(r.status) << ','
        << r.scenario_hash << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << kConvergenceHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.scheme) << ',' << format_double(r.p0_dbm) << ',' << r.channel_draw << ',' << r.outer_iter
        << ',' << format_double(r.crlb_rad2) << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  return read_csv<ResultRow>(in, kResultsHeader, 11, [](const std::vector<std::string>& c) {
    ResultRow r;
    r.scheme = parse_scheme(c[0]);
    r.p0_dbm = parse_double_cell(c[1]);
    r.channel_draw = parse_int_cell<int>(c[2]);
    r.crlb_rad2 = parse_double_cell(c[3]);
    r.mse_rad2 = parse_double_cell(c[4]);
    r.mse_stderr = parse_double_cell(c[5]);
    r.outer_iters = parse_int_cell<int>(c[6]);
    r.wall_time_s = parse_double_cell(c[7]);
    r.seed = parse_int_cell<std::uint64_t>(c[8]);
    r.status = parse_row_status(c[9]);
    r.scenario_hash = parse_int_cell<std::uint64_t>(c[10]);
    return r;
  });
}

std::vector<TraceRow> read_convergence_csv(std::istream& in) {
  return read_csv<TraceRow>(in, kConvergenceHeader, 5, [](const std::vector<std::string>& c) {
    TraceRow r;
    r.scheme = parse_scheme(c[0]);
    r.p0_dbm = parse_double_cell(c[1]);
    r.channel_draw = parse_int_cell<int>(c[2]);
    r.outer_iter = parse_int_cell<int>(c[3]);
    r.crlb_rad2 = parse_double_cell(c[4]);
    return r;
  });
}

std::string config_json(const ExperimentConfig& c) {
  using nlohmann::ordered_json;
  const Scenario& s = c.scenario;
  ordered_json scen{
      {"num_ap_antennas", s.num_ap_antennas},
      {"num_irs_elements", s.num_irs_elements},
      {"dwell_slots", s.dwell_slots},
      {"power_budget_w", s.power_budget_w},
      {"noise_power_w", s.noise_power_w},
      {"element_spacing_ratio", s.element_spacing_ratio},
      {"ap_position", {s.ap_position.x, s.ap_position.y}},
      {"irs_position", {s.irs_position.x, s.irs_position.y}},
      {"target_position", {s.target_position.x, s.target_position.y}},
      // JSON has no infinity; the text form keeps pure-LoS configs representable.
      {"rician_factor", format_double(s.rician_factor)},
      {"pathloss_ref", s.pathloss_ref},
      {"ref_distance_m", s.ref_distance_m},
      {"pathloss_exponent", s.pathloss_exponent},
      {"rcs", s.rcs},
      {"rng_seed", s.rng_seed},
      {"irs_broadside_rad", irs_broadside(s)},
      {"ap_broadside_rad", s.ap_broadside_rad},
  };
  ordered_json schemes = ordered_json::array();
  for (Scheme sc : c.schemes) schemes.push_back(std::string(to_string(sc)));
  ordered_json j{
      {"scenario_path", c.scenario_path.string()},
      {"scenario_hash", scenario_hash(s)},
      {"scenario", scen},
      {"schemes", schemes},
      {"power_sweep_dbm", {{"start", c.sweep.start_dbm}, {"stop", c.sweep.stop_dbm}, {"step", c.sweep.step_dbm}}},
      {"power_points_dbm", c.sweep.points()},
      {"channel_draws", c.num_channel_draws},
      {"mc_trials", c.num_mc_trials},
      {"output_dir", c.output_dir.string()},
      {"master_seed", c.master_seed},
      {"threads", c.threads},
      {"assumed_theta_offset_rad", c.assumed_theta_offset_rad},
      {"optimizer",
       {{"max_outer", c.optimizer.max_outer},
        {"outer_tol", c.optimizer.outer_tol},
        {"sca_max_iterations", c.optimizer.reflect.sca.max_iterations},
        {"sca_rel_tol", c.optimizer.reflect.sca.rel_tol},
        {"randomization_samples", c.optimizer.reflect.randomization_samples},
        {"sdp_tol", c.optimizer.solver.tol},
        {"sdp_max_iterations", c.optimizer.solver.max_iterations}}},
      {"mle", {{"grid_step", c.mle.grid_step}, {"refine_iters", c.mle.refine_iters}}},
      {"record_timing", c.record_timing},
  };
  return j.dump(2) + "\n";
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result) {
  std::filesystem::create_directories(config.output_dir);
  auto open = [&](const char* name) {
    std::ofstream f(config.output_dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (config.output_dir / name).string());
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(f, result.rows);
  }
  {
    auto f = open("convergence.csv");
    write_convergence_csv(f, result.traces);
  }
  {
    auto f = open("config.json");
    f << config_json(config);
  }
}

}  // namespace irscrlb

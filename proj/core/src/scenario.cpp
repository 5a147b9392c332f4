#include "irscrlb/scenario.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "irscrlb/kv_config.hpp"

namespace irscrlb {

Rng derive_rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (stream.size() + 1));
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

Complex standard_complex_normal(Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1000.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void Scenario::validate() const {
  // ConfigError is an invalid_argument that also carries the field name.
  auto fail = [](const char* field, const char* why) { throw ConfigError(field, why); };
  if (num_ap_antennas <= 1) fail("num_ap_antennas", "must be > 1");
  if (num_irs_elements <= 1) fail("num_irs_elements", "must be > 1");
  if (dwell_slots < 1) fail("dwell_slots", "must be >= 1");
  if (!(power_budget_w > 0.0)) fail("power_budget", "must be positive");
  if (!(noise_power_w > 0.0)) fail("noise_power", "must be positive");
  if (!(element_spacing_ratio > 0.0)) fail("element_spacing_ratio", "must be positive");
  if (!(rician_factor >= 0.0)) fail("rician_factor", "must be >= 0");
  if (!(pathloss_ref > 0.0)) fail("pathloss_ref", "must be positive");
  if (!(ref_distance_m > 0.0)) fail("ref_distance_m", "must be positive");
  if (!(pathloss_exponent >= 0.0)) fail("pathloss_exponent", "must be >= 0");
  if (!(rcs >= 0.0)) fail("rcs", "must be >= 0");
}

Scenario reference_scenario() { return Scenario{}; }

namespace {

Point2 to_point(const KvEntry& e) {
  auto v = kv_to_doubles(e);
  if (v.size() != 2) throw ConfigError(e.key, "expected two coordinates 'x, y'");
  return {v[0], v[1]};
}

int to_positive_int(const KvEntry& e) {
  auto v = kv_to_int(e);
  if (v < 1 || v > 1'000'000) throw ConfigError(e.key, "expected a positive integer");
  return static_cast<int>(v);
}

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  bool have_p0_w = false, have_p0_dbm = false, have_n_w = false, have_n_dbm = false;
  bool have_k0 = false, have_k0_db = false;
  using Setter = std::function<void(const KvEntry&)>;
  const std::map<std::string, Setter, std::less<>> setters{
      {"num_ap_antennas", [&](const KvEntry& e) { s.num_ap_antennas = to_positive_int(e); }},
      {"num_irs_elements", [&](const KvEntry& e) { s.num_irs_elements = to_positive_int(e); }},
      {"dwell_slots", [&](const KvEntry& e) { s.dwell_slots = to_positive_int(e); }},
      {"power_budget_dbm", [&](const KvEntry& e) { s.power_budget_w = dbm_to_watts(kv_to_double(e)); have_p0_dbm = true; }},
      {"power_budget_w", [&](const KvEntry& e) { s.power_budget_w = kv_to_double(e); have_p0_w = true; }},
      {"noise_power_dbm", [&](const KvEntry& e) { s.noise_power_w = dbm_to_watts(kv_to_double(e)); have_n_dbm = true; }},
      {"noise_power_w", [&](const KvEntry& e) { s.noise_power_w = kv_to_double(e); have_n_w = true; }},
      {"element_spacing_ratio", [&](const KvEntry& e) { s.element_spacing_ratio = kv_to_double(e); }},
      {"ap_position", [&](const KvEntry& e) { s.ap_position = to_point(e); }},
      {"irs_position", [&](const KvEntry& e) { s.irs_position = to_point(e); }},
      {"target_position", [&](const KvEntry& e) { s.target_position = to_point(e); }},
      {"rician_factor", [&](const KvEntry& e) { s.rician_factor = kv_to_double(e); }},
      {"pathloss_ref_db", [&](const KvEntry& e) { s.pathloss_ref = db_to_linear(kv_to_double(e)); have_k0_db = true; }},
      {"pathloss_ref", [&](const KvEntry& e) { s.pathloss_ref = kv_to_double(e); have_k0 = true; }},
      {"ref_distance_m", [&](const KvEntry& e) { s.ref_distance_m = kv_to_double(e); }},
      {"pathloss_exponent", [&](const KvEntry& e) { s.pathloss_exponent = kv_to_double(e); }},
      {"rcs", [&](const KvEntry& e) { s.rcs = kv_to_double(e); }},
      {"rng_seed", [&](const KvEntry& e) { s.rng_seed = kv_to_uint(e); }},
      {"irs_broadside_deg", [&](const KvEntry& e) { s.irs_broadside_rad = deg_to_rad(kv_to_double(e)); }},
      {"irs_broadside_rad", [&](const KvEntry& e) { s.irs_broadside_rad = kv_to_double(e); }},
      {"ap_broadside_deg", [&](const KvEntry& e) { s.ap_broadside_rad = deg_to_rad(kv_to_double(e)); }},
      {"ap_broadside_rad", [&](const KvEntry& e) { s.ap_broadside_rad = kv_to_double(e); }},
  };
  for (const auto& entry : parse_kv(text)) {
    auto it = setters.find(entry.key);
    if (it == setters.end()) throw ConfigError(entry.key, "unknown scenario key");
    it->second(entry);
  }
  if (have_p0_w && have_p0_dbm) throw ConfigError("power_budget_dbm", "conflicts with power_budget_w");
  if (have_n_w && have_n_dbm) throw ConfigError("noise_power_dbm", "conflicts with noise_power_w");
  if (have_k0 && have_k0_db) throw ConfigError("pathloss_ref_db", "conflicts with pathloss_ref");
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_text_file(path)); }

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto pt = [](Point2 p) { return format_double(p.x) + ", " + format_double(p.y); };
  kv("num_ap_antennas", std::to_string(s.num_ap_antennas));
  kv("num_irs_elements", std::to_string(s.num_irs_elements));
  kv("dwell_slots", std::to_string(s.dwell_slots));
  out << "# " << format_double(watts_to_dbm(s.power_budget_w)) << " dBm\n";
  kv("power_budget_w", format_double(s.power_budget_w));
  out << "# " << format_double(watts_to_dbm(s.noise_power_w)) << " dBm\n";
  kv("noise_power_w", format_double(s.noise_power_w));
  kv("element_spacing_ratio", format_double(s.element_spacing_ratio));
  kv("ap_position", pt(s.ap_position));
  kv("irs_position", pt(s.irs_position));
  kv("target_position", pt(s.target_position));
  kv("rician_factor", format_double(s.rician_factor));
  kv("pathloss_ref", format_double(s.pathloss_ref));
  kv("ref_distance_m", format_double(s.ref_distance_m));
  kv("pathloss_exponent", format_double(s.pathloss_exponent));
  kv("rcs", format_double(s.rcs));
  kv("rng_seed", std::to_string(s.rng_seed));
  if (s.irs_broadside_rad) kv("irs_broadside_rad", format_double(*s.irs_broadside_rad));
  kv("ap_broadside_rad", format_double(s.ap_broadside_rad));
  return out.str();
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize_scenario(scenario)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

double path_loss(double distance_m, const Scenario& scenario) {
  if (!(distance_m > 0.0)) throw std::domain_error("path_loss: distance must be positive");
  return scenario.pathloss_ref * std::pow(distance_m / scenario.ref_distance_m, -scenario.pathloss_exponent);
}

double angle_from_broadside(Point2 from, Point2 to, double broadside_rad) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double along = dx * std::cos(broadside_rad) + dy * std::sin(broadside_rad);
  const double across = dx * std::sin(broadside_rad) - dy * std::cos(broadside_rad);
  return std::atan2(across, along);
}

double irs_broadside(const Scenario& s) {
  if (s.irs_broadside_rad) return *s.irs_broadside_rad;
  return std::atan2(s.target_position.y - s.irs_position.y, s.target_position.x - s.irs_position.x);
}

double target_doa(const Scenario& s) { return angle_from_broadside(s.irs_position, s.target_position, irs_broadside(s)); }

CVector ula_response(int n, double phi, double spacing_ratio) {
  CVector a(n);
  const double step = 2.0 * kPi * spacing_ratio * std::sin(phi);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, step * i);
  return a;
}

ChannelRealization generate_channel(const Scenario& s, Rng& rng) {
  s.validate();
  const int m = s.num_ap_antennas;
  const int n = s.num_irs_elements;
  const double dx = s.irs_position.x - s.ap_position.x;
  const double dy = s.irs_position.y - s.ap_position.y;
  const double pl_ai = path_loss(std::hypot(dx, dy), s);

  const double phi_at_irs = angle_from_broadside(s.irs_position, s.ap_position, irs_broadside(s));
  const double phi_at_ap = angle_from_broadside(s.ap_position, s.irs_position, s.ap_broadside_rad);
  const CMatrix g_los = ula_response(n, phi_at_irs, s.element_spacing_ratio) *
                        ula_response(m, phi_at_ap, 0.5).transpose();

  double w_los = 1.0, w_nlos = 0.0;
  if (std::isfinite(s.rician_factor)) {
    w_los = std::sqrt(s.rician_factor / (1.0 + s.rician_factor));
    w_nlos = std::sqrt(1.0 / (1.0 + s.rician_factor));
  }
  CMatrix g_nlos(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) g_nlos(i, j) = standard_complex_normal(rng);

  ChannelRealization out;
  out.G = std::sqrt(pl_ai) * (w_los * g_los + w_nlos * g_nlos);

  const double d_it = std::hypot(s.target_position.x - s.irs_position.x, s.target_position.y - s.irs_position.y);
  const double magnitude = std::sqrt(s.rcs) * path_loss(d_it, s);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  out.alpha = std::polar(magnitude, phase(rng));
  out.theta = target_doa(s);
  return out;
}

}  // namespace irscrlb

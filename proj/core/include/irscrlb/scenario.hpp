#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "irscrlb/types.hpp"

namespace irscrlb {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Experiment ground truth. Powers are stored in watts and gains as linear
/// ratios; the key-value file format carries dBm / dB and is converted once on
/// load.
struct Scenario {
  int num_ap_antennas = 8;
  int num_irs_elements = 8;
  int dwell_slots = 256;
  double power_budget_w = 1.0;      // 30 dBm
  double noise_power_w = 1e-15;     // -120 dBm
  double element_spacing_ratio = 0.5;
  Point2 ap_position{0.0, 0.0};
  Point2 irs_position{5.0, 5.0};
  Point2 target_position{5.0, 0.0};
  double rician_factor = 0.5;       // may be +inf (pure LoS)
  double pathloss_ref = 1e-3;       // -30 dB at ref_distance_m
  double ref_distance_m = 1.0;
  double pathloss_exponent = 2.5;
  double rcs = 1.0;
  std::uint64_t rng_seed = 1;
  /// Broadside directions as angles from the +x axis. The IRS default points
  /// at the target, so the true DoA is zero; the AP default faces +y.
  std::optional<double> irs_broadside_rad;
  double ap_broadside_rad = kPi / 2.0;

  /// Throws ConfigError (an std::invalid_argument) naming the offending field.
  void validate() const;
};

/// The reference deployment: 8 AP antennas, 8 IRS elements, 256 slots, AP at
/// the origin, IRS at (5, 5) m, target at (5, 0) m.
Scenario reference_scenario();

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
/// Canonical key-value text; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);
/// FNV-1a over the canonical serialization.
std::uint64_t scenario_hash(const Scenario& scenario);

/// K0 (d / d0)^(-a0). Throws std::domain_error for d <= 0.
double path_loss(double distance_m, const Scenario& scenario);

/// Angle of `to` seen from `from`, measured from the given broadside
/// direction, positive towards the array axis (broadside rotated clockwise).
double angle_from_broadside(Point2 from, Point2 to, double broadside_rad);

double irs_broadside(const Scenario& scenario);
/// DoA of the target w.r.t. the IRS broadside.
double target_doa(const Scenario& scenario);

struct ChannelRealization {
  CMatrix G;           // N x M, AP -> IRS
  Complex alpha;       // target coefficient incl. RCS and round-trip loss
  double theta = 0.0;  // true DoA, radians
};

/// Uniform linear array response exp(j 2 pi r n sin(phi)), n = 0..n-1.
CVector ula_response(int n, double phi, double spacing_ratio);

ChannelRealization generate_channel(const Scenario& scenario, Rng& rng);

}  // namespace irscrlb

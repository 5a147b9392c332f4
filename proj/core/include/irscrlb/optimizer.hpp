#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "irscrlb/estimation.hpp"
#include "irscrlb/rbf.hpp"
#include "irscrlb/scenario.hpp"
#include "irscrlb/sdp.hpp"

namespace irscrlb {

enum class Scheme { crlb_min, snr_max, reflective_only, transmit_only };

inline constexpr std::array<Scheme, 4> kAllSchemes = {Scheme::crlb_min, Scheme::snr_max, Scheme::reflective_only,
                                                      Scheme::transmit_only};

std::string_view to_string(Scheme scheme);
/// Throws std::invalid_argument for unknown labels.
Scheme parse_scheme(std::string_view label);

struct JointDesign {
  Scheme scheme = Scheme::crlb_min;
  CMatrix Rx;
  CVector v;
  Crlb crlb = Crlb::unbounded();  // at the true DoA
  double design_crlb = 0.0;       // at the assumed DoA the design was optimized for; +inf if unbounded
  std::vector<double> crlb_trace; // after every half-step (crlb_min) or the single final value
  std::vector<double> outer_trace;  // initial value, then one entry per outer iteration
  int outer_iterations = 0;
  bool converged = false;
  bool identifiable = true;
  int solver_failures = 0;
  double max_relative_gap = 0.0;  // over every SDP solved for this design, warm starts included
  /// Inner SCA objective (normalized units) of every reflect step, including
  /// those of warm-started runs that were not kept.
  std::vector<std::vector<double>> sca_objectives;
  std::optional<Scheme> warm_start;  // benchmark the final crlb_min run started from, if any
  double wall_time_s = 0.0;          // set by design_schemes; excludes the benchmarks crlb_min reuses
};

struct OptimizerOptions {
  int max_outer = 20;
  double outer_tol = 1e-3;
  ReflectOptions reflect;
  sdp::Options solver;
};

/// CRLB of (Rx, v) for the channel at angle `theta`, with the true alpha.
Crlb design_crlb(const Scenario& scenario, const ChannelRealization& channel, const CMatrix& Rx, const CVector& v,
                 double theta);

/// Alternates optimize_reflect and optimize_transmit from the isotropic
/// covariance and all-ones phases. Every half-step is kept only if it does not
/// raise the CRLB, so the trace is non-increasing. Each design in
/// `warm_starts` that beats the result is used as a second starting point and
/// the better of the two runs is returned.
JointDesign minimize_crlb(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta, Rng& rng,
                          const OptimizerOptions& options = {}, std::span<const JointDesign> warm_starts = {},
                          const sdp::Backend& backend = sdp::default_backend());

/// Phases maximizing |G^T A v|^2 (SDR plus randomization, all-ones kept as a
/// candidate) and maximum-ratio transmission toward the cascaded channel.
JointDesign design_snr_max(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta, Rng& rng,
                           const OptimizerOptions& options = {}, const sdp::Backend& backend = sdp::default_backend());

/// Isotropic covariance and one reflect pass from all-ones phases.
JointDesign design_reflective_only(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta,
                                   Rng& rng, const OptimizerOptions& options = {},
                                   const sdp::Backend& backend = sdp::default_backend());

/// Uniformly random phases and the optimal covariance for them.
JointDesign design_transmit_only(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta,
                                 Rng& rng, const OptimizerOptions& options = {},
                                 const sdp::Backend& backend = sdp::default_backend());

/// Designs for the requested schemes, in request order. Every scheme draws
/// from its own stream derive_rng(master_seed, {draw, scheme}); the
/// benchmarks are always computed so that crlb_min can be warm-started from
/// them, which makes its result independent of the request list.
std::vector<JointDesign> design_schemes(const Scenario& scenario, const ChannelRealization& channel,
                                        double assumed_theta, std::span<const Scheme> schemes,
                                        std::uint64_t master_seed, std::uint64_t draw,
                                        const OptimizerOptions& options = {},
                                        const sdp::Backend& backend = sdp::default_backend());

}  // namespace irscrlb

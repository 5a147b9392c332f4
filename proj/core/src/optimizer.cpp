#include "irscrlb/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "irscrlb/txbf.hpp"

namespace irscrlb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMatrix isotropic(const Scenario& s) {
  return CMatrix::Identity(s.num_ap_antennas, s.num_ap_antennas) *
         (s.power_budget_w / static_cast<double>(s.num_ap_antennas));
}

void finalize(JointDesign& d, const Scenario& s, const ChannelRealization& ch, double assumed_theta) {
  d.crlb = design_crlb(s, ch, d.Rx, d.v, ch.theta);
  d.design_crlb = design_crlb(s, ch, d.Rx, d.v, assumed_theta).value_or_inf();
  d.identifiable = identifiability(ch.G).identifiable;
}

// Benchmarks have no outer loop; their trace is the final value alone.
void single_point_trace(JointDesign& d) {
  d.crlb_trace = {d.design_crlb};
  d.outer_trace = {d.design_crlb};
}

JointDesign alternate(const Scenario& s, const ChannelRealization& ch, double theta, CMatrix Rx, CVector v, Rng& rng,
                      const OptimizerOptions& opt, const sdp::Backend& backend) {
  JointDesign d;
  d.scheme = Scheme::crlb_min;
  const double ratio = s.element_spacing_ratio;
  auto crlb_of = [&](const CMatrix& R, const CVector& w) { return design_crlb(s, ch, R, w, theta).value_or_inf(); };

  double current = crlb_of(Rx, v);
  d.crlb_trace.push_back(current);
  d.outer_trace.push_back(current);
  for (int k = 1; k <= opt.max_outer; ++k) {
    const double before = current;
    d.outer_iterations = k;
    // Reflect first: the starting covariance is then actually used, and the
    // first half-step is the reflective-only design.
    try {
      const auto rf = optimize_reflect(ch.G, Rx, theta, ratio, v, rng, opt.reflect, backend);
      for (double g : rf.sca.trace.gaps) d.max_relative_gap = std::max(d.max_relative_gap, g);
      if (rf.sca.trace.failed) ++d.solver_failures;
      d.sca_objectives.push_back(rf.sca.trace.objective);
      const double c = crlb_of(Rx, rf.v);
      if (c <= current) {
        v = rf.v;
        current = c;
      }
    } catch (const DegenerateReflector&) {
    }
    d.crlb_trace.push_back(current);

    try {
      const auto tx = optimize_transmit(ch.G, v, theta, s.power_budget_w, ratio, backend, opt.solver);
      d.max_relative_gap = std::max(d.max_relative_gap, tx.solver.relative_gap());
      const double c = crlb_of(tx.Rx, v);
      if (c <= current) {
        Rx = tx.Rx;
        current = c;
      }
    } catch (const std::domain_error&) {
      // b = 0 at this v: no covariance helps; the next reflect step may move v.
    } catch (const std::runtime_error&) {
      ++d.solver_failures;
      break;
    }
    d.crlb_trace.push_back(current);
    d.outer_trace.push_back(current);

    if (std::isfinite(before) && before - current <= opt.outer_tol * before) {
      d.converged = true;
      break;
    }
  }
  d.Rx = std::move(Rx);
  d.v = std::move(v);
  return d;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::crlb_min: return "crlb_min";
    case Scheme::snr_max: return "snr_max";
    case Scheme::reflective_only: return "reflective_only";
    case Scheme::transmit_only: return "transmit_only";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view label) {
  for (Scheme s : kAllSchemes)
    if (to_string(s) == label) return s;
  throw std::invalid_argument("unknown scheme '" + std::string(label) + "'");
}

Crlb design_crlb(const Scenario& scenario, const ChannelRealization& channel, const CMatrix& Rx, const CVector& v,
                 double theta) {
  return crlb_theta(cascaded_response(channel.G, v, theta, scenario.element_spacing_ratio), channel.alpha, Rx,
                    scenario.dwell_slots, scenario.noise_power_w);
}

JointDesign minimize_crlb(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta, Rng& rng,
                          const OptimizerOptions& options, std::span<const JointDesign> warm_starts,
                          const sdp::Backend& backend) {
  const int n = scenario.num_irs_elements;
  if (!identifiability(channel.G).identifiable) {
    JointDesign d;
    d.scheme = Scheme::crlb_min;
    d.Rx = isotropic(scenario);
    d.v = CVector::Ones(n);
    finalize(d, scenario, channel, assumed_theta);
    d.crlb = Crlb::unbounded();
    d.design_crlb = kInf;
    d.identifiable = false;
    return d;
  }

  JointDesign best =
      alternate(scenario, channel, assumed_theta, isotropic(scenario), CVector::Ones(n), rng, options, backend);
  finalize(best, scenario, channel, assumed_theta);
  for (const auto& start : warm_starts) {
    if (!(start.design_crlb < best.design_crlb)) continue;
    JointDesign alt = alternate(scenario, channel, assumed_theta, start.Rx, start.v, rng, options, backend);
    finalize(alt, scenario, channel, assumed_theta);
    alt.warm_start = start.scheme;
    alt.solver_failures += best.solver_failures;
    alt.max_relative_gap = std::max(alt.max_relative_gap, best.max_relative_gap);
    alt.sca_objectives.insert(alt.sca_objectives.begin(), best.sca_objectives.begin(), best.sca_objectives.end());
    if (alt.design_crlb < best.design_crlb) {
      best = std::move(alt);
    } else {
      best.solver_failures = alt.solver_failures;
      best.max_relative_gap = alt.max_relative_gap;
      best.sca_objectives = std::move(alt.sca_objectives);
    }
  }
  // The starting designs are part of how this one was found.
  for (const auto& start : warm_starts) best.max_relative_gap = std::max(best.max_relative_gap, start.max_relative_gap);
  return best;
}

JointDesign design_snr_max(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta, Rng& rng,
                           const OptimizerOptions& options, const sdp::Backend& backend) {
  const int n = scenario.num_irs_elements;
  const double ratio = scenario.element_spacing_ratio;
  const CMatrix R1 =
      reflect_matrices(channel.G, CMatrix::Identity(channel.G.cols(), channel.G.cols()), assumed_theta, ratio).R1;
  auto gain = [&R1](const CVector& v) { return v.dot(R1 * v).real(); };

  JointDesign d;
  d.scheme = Scheme::snr_max;
  d.v = CVector::Ones(n);
  const CMatrix V = unit_diagonal_sdr(R1, backend, options.solver);
  const CVector cand = gaussian_randomize(V, gain, options.reflect.randomization_samples, rng);
  if (gain(cand) > gain(d.v)) d.v = cand;

  const CVector b = cascaded_response(channel.G, d.v, assumed_theta, ratio).b;
  if (b.norm() > 0.0) {
    const CVector w = b.conjugate() / b.norm();
    d.Rx = scenario.power_budget_w * w * w.adjoint();
  } else {
    d.Rx = isotropic(scenario);
  }
  finalize(d, scenario, channel, assumed_theta);
  single_point_trace(d);
  return d;
}

JointDesign design_reflective_only(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta,
                                   Rng& rng, const OptimizerOptions& options, const sdp::Backend& backend) {
  JointDesign d;
  d.scheme = Scheme::reflective_only;
  d.Rx = isotropic(scenario);
  d.v = CVector::Ones(scenario.num_irs_elements);
  try {
    const auto rf =
        optimize_reflect(channel.G, d.Rx, assumed_theta, scenario.element_spacing_ratio, d.v, rng, options.reflect,
                         backend);
    for (double g : rf.sca.trace.gaps) d.max_relative_gap = std::max(d.max_relative_gap, g);
    if (rf.sca.trace.failed) ++d.solver_failures;
    d.sca_objectives.push_back(rf.sca.trace.objective);
    d.v = rf.v;
  } catch (const DegenerateReflector&) {
  }
  finalize(d, scenario, channel, assumed_theta);
  single_point_trace(d);
  return d;
}

JointDesign design_transmit_only(const Scenario& scenario, const ChannelRealization& channel, double assumed_theta,
                                 Rng& rng, const OptimizerOptions& options, const sdp::Backend& backend) {
  JointDesign d;
  d.scheme = Scheme::transmit_only;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  d.v.resize(scenario.num_irs_elements);
  for (auto& x : d.v) x = std::polar(1.0, phase(rng));
  d.Rx = isotropic(scenario);
  try {
    const auto tx = optimize_transmit(channel.G, d.v, assumed_theta, scenario.power_budget_w,
                                      scenario.element_spacing_ratio, backend, options.solver);
    d.max_relative_gap = tx.solver.relative_gap();
    d.Rx = tx.Rx;
  } catch (const std::domain_error&) {
  } catch (const std::runtime_error&) {
    ++d.solver_failures;
  }
  finalize(d, scenario, channel, assumed_theta);
  single_point_trace(d);
  return d;
}

std::vector<JointDesign> design_schemes(const Scenario& scenario, const ChannelRealization& channel,
                                        double assumed_theta, std::span<const Scheme> schemes,
                                        std::uint64_t master_seed, std::uint64_t draw,
                                        const OptimizerOptions& options, const sdp::Backend& backend) {
  auto stream = [&](Scheme s) { return derive_rng(master_seed, {draw, static_cast<std::uint64_t>(s)}); };
  std::array<std::optional<JointDesign>, 4> done;
  auto design = [&](auto& self, Scheme s) -> const JointDesign& {
    auto& slot = done[static_cast<std::size_t>(s)];
    if (!slot) {
      double reused = 0.0;
      Rng rng = stream(s);
      const auto start = std::chrono::steady_clock::now();
      switch (s) {
        case Scheme::snr_max: slot = design_snr_max(scenario, channel, assumed_theta, rng, options, backend); break;
        case Scheme::reflective_only:
          slot = design_reflective_only(scenario, channel, assumed_theta, rng, options, backend);
          break;
        case Scheme::transmit_only:
          slot = design_transmit_only(scenario, channel, assumed_theta, rng, options, backend);
          break;
        case Scheme::crlb_min: {
          std::vector<JointDesign> starts;
          for (Scheme b : {Scheme::snr_max, Scheme::reflective_only, Scheme::transmit_only}) {
            const bool fresh = !done[static_cast<std::size_t>(b)];
            starts.push_back(self(self, b));
            if (fresh) reused += starts.back().wall_time_s;
          }
          Rng own = stream(Scheme::crlb_min);
          slot = minimize_crlb(scenario, channel, assumed_theta, own, options, starts, backend);
          break;
        }
      }
      slot->wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() - reused;
    }
    return *slot;
  };

  std::vector<JointDesign> out;
  out.reserve(schemes.size());
  for (Scheme s : schemes) out.push_back(design(design, s));
  return out;
}

}  // namespace irscrlb

#pragma once

#include <vector>

#include "irscrlb/sdp.hpp"
#include "irscrlb/sensing.hpp"

namespace irscrlb {

struct Beam {
  double power = 0.0;
  CVector direction;  // unit norm
};

/// Eigen-pairs of Rx with non-negative powers, strongest first.
std::vector<Beam> extract_beams(const CMatrix& Rx);

/// Number of beams carrying more than `relative_floor` of the total power.
int count_beams(const std::vector<Beam>& beams, double relative_floor = 1e-6);

struct TransmitCovariance {
  CMatrix Rx;
  std::vector<Beam> beams;
  double epigraph = 0.0;    // t at the SDP optimum
  double information = 0.0; // transmit_information(response, Rx) at the returned Rx
  bool degenerate = false;  // rank-1 G: no angle information can be gained
  sdp::Solution solver;
};

/// Maximizes tr(B' Rx B'^H) - |tr(B Rx B'^H)|^2 / tr(B Rx B^H) over
/// tr(Rx) <= P0, Rx >= 0, for the cascade at (v, theta), through its
/// Schur-complement SDP. Throws std::domain_error when b = G^T A v vanishes
/// and std::runtime_error when the backend does not reach optimality.
TransmitCovariance optimize_transmit(const CMatrix& G, const CVector& v, double theta, double power_budget,
                                     double spacing_ratio, const sdp::Backend& backend = sdp::default_backend(),
                                     const sdp::Options& options = {});

}  // namespace irscrlb

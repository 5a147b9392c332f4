#pragma once

#include "irscrlb/scenario.hpp"
#include "irscrlb/types.hpp"

namespace irscrlb {

/// IRS steering vector: entry n is exp(j 2 pi r n sin(theta)).
CVector steering_vector(double theta, int num_elements, double spacing_ratio);

/// |cos(theta)| at or below this is endfire: the angle derivative is zero.
inline constexpr double kEndfireCosine = 1e-12;

/// Steering quantities at one angle. A = diag(a) and D = diag(0..N-1) are kept
/// as their diagonals.
struct SteeringContext {
  CVector a;
  RVector d;
  double derivative_scale = 0.0;  // 2 pi r cos(theta)

  static SteeringContext at(double theta, int num_elements, double spacing_ratio);
};

/// b = G^T A v, its angle derivative, B = b b^T and dB/dtheta = b' b^T + b b'^T.
struct CascadedResponse {
  CVector b;
  CVector b_dot;
  CMatrix B;
  CMatrix B_dot;
};

/// Throws std::invalid_argument on dimension mismatch.
CascadedResponse cascaded_response(const CMatrix& G, const CVector& v, double theta, double spacing_ratio);

/// Quadratic-form matrices of the reflect-side CRLB:
///   R1 = A^H G^* G^T A,  R2 = A^H G^* Rx^* G^T A.
struct ReflectMatrices {
  CMatrix R1;
  CMatrix R2;
  RVector d;              // diagonal of D
  double derivative_scale = 0.0;
};

ReflectMatrices reflect_matrices(const CMatrix& G, const CMatrix& Rx, double theta, double spacing_ratio);

/// X = sqrt(T) U L^{1/2} Q^H with Q a fixed set of orthonormal DFT columns, so
/// that X X^H / T reproduces Rx. Throws std::invalid_argument when T is smaller
/// than the numerical rank of Rx.
CMatrix synthesize_waveform(const CMatrix& Rx, int dwell_slots);

/// Y = alpha B X + noise, noise i.i.d. CN(0, noise_power).
CMatrix simulate_echo(const ChannelRealization& channel, const CVector& v, const CMatrix& X, double noise_power,
                      double spacing_ratio, Rng& rng);

/// Unit-modulus vector with the phases of `z` (zero entries map to phase 0).
CVector unit_modulus(const CVector& z);

}  // namespace irscrlb

#include "irscrlb/sensing.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace irscrlb {

CVector steering_vector(double theta, int num_elements, double spacing_ratio) {
  return ula_response(num_elements, theta, spacing_ratio);
}

SteeringContext SteeringContext::at(double theta, int num_elements, double spacing_ratio) {
  SteeringContext ctx;
  ctx.a = steering_vector(theta, num_elements, spacing_ratio);
  ctx.d = RVector::LinSpaced(num_elements, 0.0, num_elements - 1.0);
  // cos(pi/2) rounds to ~6e-17 rather than zero; treat that as endfire.
  const double c = std::cos(theta);
  ctx.derivative_scale = std::abs(c) <= kEndfireCosine ? 0.0 : 2.0 * kPi * spacing_ratio * c;
  return ctx;
}

CascadedResponse cascaded_response(const CMatrix& G, const CVector& v, double theta, double spacing_ratio) {
  if (G.rows() != v.size()) {
    throw std::invalid_argument("cascaded_response: G has " + std::to_string(G.rows()) + " rows but v has " +
                                std::to_string(v.size()) + " entries");
  }
  const auto ctx = SteeringContext::at(theta, static_cast<int>(v.size()), spacing_ratio);
  const CVector av = ctx.a.cwiseProduct(v);
  const CVector dav = av.cwiseProduct(ctx.d.cast<Complex>());

  CascadedResponse r;
  r.b = G.transpose() * av;
  r.b_dot = Complex(0.0, ctx.derivative_scale) * (G.transpose() * dav);
  r.B = r.b * r.b.transpose();
  r.B_dot = r.b_dot * r.b.transpose() + r.b * r.b_dot.transpose();
  return r;
}

ReflectMatrices reflect_matrices(const CMatrix& G, const CMatrix& Rx, double theta, double spacing_ratio) {
  if (Rx.rows() != G.cols() || Rx.cols() != G.cols()) {
    throw std::invalid_argument("reflect_matrices: Rx must be M x M with M = cols(G)");
  }
  const auto ctx = SteeringContext::at(theta, static_cast<int>(G.rows()), spacing_ratio);
  // GA = G^T A (M x N).
  const CMatrix GA = G.transpose() * ctx.a.asDiagonal();
  ReflectMatrices out;
  out.R1 = GA.adjoint() * GA;
  out.R2 = GA.adjoint() * Rx.conjugate() * GA;
  // Exact Hermitian symmetry.
  out.R1 = (0.5 * (out.R1 + out.R1.adjoint())).eval();
  out.R2 = (0.5 * (out.R2 + out.R2.adjoint())).eval();
  out.d = ctx.d;
  out.derivative_scale = ctx.derivative_scale;
  return out;
}

CMatrix synthesize_waveform(const CMatrix& Rx, int dwell_slots) {
  if (Rx.rows() != Rx.cols()) throw std::invalid_argument("synthesize_waveform: Rx must be square");
  const Eigen::Index m = Rx.rows();
  const Eigen::Index t = dwell_slots;
  CMatrix X = CMatrix::Zero(m, t);
  if (m == 0 || Rx.cwiseAbs().maxCoeff() == 0.0) return X;

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (Rx + Rx.adjoint()));
  const RVector& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * lambda.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = m - 1; i >= 0; --i)
    if (lambda(i) > cutoff) kept.push_back(i);
  if (static_cast<Eigen::Index>(kept.size()) > t) {
    throw std::invalid_argument("synthesize_waveform: dwell time " + std::to_string(t) +
                                " is shorter than rank(Rx) = " + std::to_string(kept.size()));
  }
  // Row k of Q^H is the k-th orthonormal DFT sequence of length T.
  const double scale = std::sqrt(static_cast<double>(t));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const Eigen::Index i = kept[k];
    const CVector u = eig.eigenvectors().col(i) * std::sqrt(lambda(i));
    for (Eigen::Index s = 0; s < t; ++s) {
      const Complex q = std::polar(1.0 / scale, 2.0 * kPi * static_cast<double>(k * s % t) / static_cast<double>(t));
      X.col(s) += scale * q * u;
    }
  }
  return X;
}

CMatrix simulate_echo(const ChannelRealization& channel, const CVector& v, const CMatrix& X, double noise_power,
                      double spacing_ratio, Rng& rng) {
  const auto resp = cascaded_response(channel.G, v, channel.theta, spacing_ratio);
  if (X.rows() != resp.b.size()) throw std::invalid_argument("simulate_echo: X must have M rows");
  // alpha B X = alpha b (b^T X)
  CMatrix Y = (channel.alpha * resp.b) * (resp.b.transpose() * X);
  if (noise_power > 0.0) {
    const double sigma = std::sqrt(noise_power);
    for (Eigen::Index j = 0; j < Y.cols(); ++j)
      for (Eigen::Index i = 0; i < Y.rows(); ++i) Y(i, j) += sigma * standard_complex_normal(rng);
  }
  return Y;
}

CVector unit_modulus(const CVector& z) {
  CVector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out(i) = z(i) == Complex(0.0) ? Complex(1.0) : z(i) / std::abs(z(i));
  return out;
}

}  // namespace irscrlb

#pragma once

// Independent reference computations. Nothing here calls into the sensing or
// estimation modules; the signal model is rebuilt from its definition.

#include <cmath>

#include "irscrlb/types.hpp"

namespace irscrlb::oracle {

inline CMatrix cascade_matrix(const CMatrix& G, const CVector& v, double theta, double ratio) {
  const Eigen::Index n = G.rows();
  CVector av(n);
  for (Eigen::Index i = 0; i < n; ++i)
    av(i) = std::exp(Complex(0.0, 2.0 * kPi * ratio * static_cast<double>(i) * std::sin(theta))) * v(i);
  const CVector b = G.transpose() * av;
  return b * b.transpose();
}

/// Stacked mean vec(alpha B(theta) X) as a function of xi = [theta, Re a, Im a].
inline CVector stacked_mean(const CMatrix& G, const CVector& v, const CMatrix& X, double ratio,
                            const Eigen::Vector3d& xi) {
  const CMatrix BX = Complex(xi(1), xi(2)) * cascade_matrix(G, v, xi(0), ratio) * X;
  return Eigen::Map<const CVector>(BX.data(), BX.size());
}

/// FIM by central differences of the stacked mean:
///   F_ik = (2 / noise) Re{ du/dxi_i^H du/dxi_k }.
inline Eigen::Matrix3d finite_difference_fim(const CMatrix& G, const CVector& v, const CMatrix& X, double ratio,
                                             double theta, Complex alpha, double noise, double h_theta = 1e-6) {
  const Eigen::Vector3d xi(theta, alpha.real(), alpha.imag());
  const double h_alpha = 1e-6 * std::max(1.0, std::abs(alpha));
  std::array<CVector, 3> d;
  for (int k = 0; k < 3; ++k) {
    const double h = k == 0 ? h_theta : h_alpha;
    Eigen::Vector3d up = xi, dn = xi;
    up(k) += h;
    dn(k) -= h;
    d[k] = (stacked_mean(G, v, X, ratio, up) - stacked_mean(G, v, X, ratio, dn)) / (2.0 * h);
  }
  Eigen::Matrix3d F;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) F(i, k) = 2.0 / noise * d[i].dot(d[k]).real();
  return F;
}

/// Largest eigenvalue of a Hermitian matrix by dense eigen-decomposition.
inline double lambda_max(const CMatrix& C) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(C, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(eig.eigenvalues().size() - 1);
}

}  // namespace irscrlb::oracle

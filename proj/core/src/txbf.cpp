#include "irscrlb/txbf.hpp"

#include <cmath>
#include <stdexcept>

#include "irscrlb/estimation.hpp"

namespace irscrlb {

std::vector<Beam> extract_beams(const CMatrix& Rx) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (Rx + Rx.adjoint()));
  std::vector<Beam> beams;
  for (Eigen::Index i = Rx.rows() - 1; i >= 0; --i) {
    beams.push_back({std::max(0.0, eig.eigenvalues()(i)), eig.eigenvectors().col(i)});
  }
  return beams;
}

int count_beams(const std::vector<Beam>& beams, double relative_floor) {
  double total = 0.0;
  for (const auto& b : beams) total += b.power;
  int n = 0;
  for (const auto& b : beams)
    if (b.power > relative_floor * total) ++n;
  return n;
}

TransmitCovariance optimize_transmit(const CMatrix& G, const CVector& v, double theta, double power_budget,
                                     double spacing_ratio, const sdp::Backend& backend, const sdp::Options& options) {
  if (!(power_budget > 0.0)) throw std::invalid_argument("optimize_transmit: power budget must be positive");
  const auto resp = cascaded_response(G, v, theta, spacing_ratio);
  const double energy = resp.b.squaredNorm();
  if (!(energy > 0.0)) throw std::domain_error("optimize_transmit: cascaded channel G^T A v is zero");

  TransmitCovariance out;
  if (!identifiability(G).identifiable) {
    // Every covariance yields zero information when rank(G) = 1, so the SDP
    // has no interior; report the isotropic point.
    out.degenerate = true;
    out.Rx = CMatrix::Identity(G.cols(), G.cols()) * (power_budget / static_cast<double>(G.cols()));
    out.information = transmit_information(resp, out.Rx);
    out.epigraph = out.information;
    out.beams = extract_beams(out.Rx);
    out.solver.status = sdp::Status::optimal;
    return out;
  }

  // Work with B / |b|^2 and Rx / P0; the optimum scales back by |b|^4 P0.
  const CMatrix B = resp.B / energy;
  const CMatrix Bd = resp.B_dot / energy;
  const int m = static_cast<int>(G.cols());

  sdp::Problem p;
  auto R = p.add_hermitian(m);
  auto t = p.add_scalar();
  p.maximize(p.expr(t));
  p.add_psd(R);
  p.add_inequality(1.0 - p.trace(R));
  const auto tdd = p.trace_product(Bd.adjoint() * Bd, R).real();  // tr(B' R B'^H)
  const auto tbd = p.trace_product(Bd.adjoint() * B, R);           // tr(B R B'^H)
  const auto tbb = p.trace_product(B.adjoint() * B, R).real();     // tr(B R B^H)
  p.add_psd_2x2(tdd - p.expr(t), tbd, tbb);

  out.solver = backend.solve(p, options);
  if (!out.solver.optimal()) {
    throw std::runtime_error(std::string("optimize_transmit: SDP backend returned ") +
                             std::string(sdp::to_string(out.solver.status)));
  }
  CMatrix Rn = out.solver.value(R);
  Rn = 0.5 * (Rn + Rn.adjoint());
  // Project onto the feasible set to remove solver-tolerance excursions.
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(Rn);
  RVector lambda = eig.eigenvalues().cwiseMax(0.0);
  if (lambda.sum() > 1.0) lambda /= lambda.sum();
  Rn = eig.eigenvectors() * lambda.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();

  out.Rx = power_budget * Rn;
  out.epigraph = out.solver.value(t) * energy * energy * power_budget;
  out.information = transmit_information(resp, out.Rx);
  out.beams = extract_beams(out.Rx);
  return out;
}

}  // namespace irscrlb

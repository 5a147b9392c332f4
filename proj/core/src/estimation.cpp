#include "irscrlb/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace irscrlb {

double Crlb::value() const {
  if (!value_) throw std::logic_error("Crlb::value: bound is unbounded");
  return *value_;
}

double Crlb::value_or_inf() const noexcept {
  return value_ ? *value_ : std::numeric_limits<double>::infinity();
}

std::ostream& operator<<(std::ostream& os, const Crlb& crlb) {
  if (crlb.is_bounded()) return os << crlb.value();
  return os << "unbounded";
}

namespace {

// tr(P Rx Q^H) for P = p1 p2^T style matrices is cheap, but the matrices here
// are at most 8x8 so plain products are used.
Complex trace_form(const CMatrix& P, const CMatrix& Rx, const CMatrix& Q) { return (P * Rx * Q.adjoint()).trace(); }

}  // namespace

FisherInfo fisher_information(const CascadedResponse& r, Complex alpha, const CMatrix& Rx, int dwell_slots,
                              double noise_power) {
  const double scale = 2.0 * dwell_slots / noise_power;
  const double tdd = trace_form(r.B_dot, Rx, r.B_dot).real();
  const Complex tbd = trace_form(r.B, Rx, r.B_dot);
  const double tbb = trace_form(r.B, Rx, r.B).real();

  FisherInfo fi;
  fi.F(0, 0) = scale * std::norm(alpha) * tdd;
  const Complex cross = std::conj(alpha) * tbd;
  // Re{c [1, j]} = [Re c, -Im c]
  fi.F(0, 1) = fi.F(1, 0) = scale * cross.real();
  fi.F(0, 2) = fi.F(2, 0) = -scale * cross.imag();
  fi.F(1, 1) = fi.F(2, 2) = scale * tbb;
  return fi;
}

FisherInfo fisher_information(const ChannelRealization& channel, const CVector& v, const CMatrix& Rx, int dwell_slots,
                              double noise_power, double spacing_ratio) {
  return fisher_information(cascaded_response(channel.G, v, channel.theta, spacing_ratio), channel.alpha, Rx,
                            dwell_slots, noise_power);
}

Crlb crlb_theta_closed_form(const FisherInfo& fisher) {
  const double ftt = fisher.theta_theta();
  const double faa = fisher.F(1, 1);
  if (!(faa > 0.0) || !(ftt > 0.0)) return Crlb::unbounded();
  const Eigen::RowVector2d fta = fisher.theta_alpha();
  const double schur = ftt - fta.dot(fisher.alpha_alpha().inverse() * fta.transpose());
  if (!(schur > kSingularityThreshold * ftt)) return Crlb::unbounded();
  return Crlb::bounded(1.0 / schur);
}

double transmit_information(const CascadedResponse& r, const CMatrix& Rx) {
  const double tdd = trace_form(r.B_dot, Rx, r.B_dot).real();
  const Complex tbd = trace_form(r.B, Rx, r.B_dot);
  const double tbb = trace_form(r.B, Rx, r.B).real();
  if (!(tbb > 0.0)) return 0.0;
  return tdd - std::norm(tbd) / tbb;
}

Crlb crlb_theta(const CascadedResponse& r, Complex alpha, const CMatrix& Rx, int dwell_slots, double noise_power) {
  const double tdd = trace_form(r.B_dot, Rx, r.B_dot).real();
  const Complex tbd = trace_form(r.B, Rx, r.B_dot);
  const double tbb = trace_form(r.B, Rx, r.B).real();
  if (!(tbb > 0.0) || !(tdd > 0.0) || alpha == Complex(0.0)) return Crlb::unbounded();
  const double info = tdd - std::norm(tbd) / tbb;
  if (!(info > kSingularityThreshold * tdd)) return Crlb::unbounded();
  return Crlb::bounded(noise_power / (2.0 * dwell_slots * std::norm(alpha) * info));
}

Crlb crlb_theta_reflective_form(const CMatrix& G, const CMatrix& Rx, const CVector& v, double theta, Complex alpha,
                                int dwell_slots, double noise_power, double spacing_ratio) {
  const double c = std::cos(theta);
  if (std::abs(c) <= kEndfireCosine || alpha == Complex(0.0)) return Crlb::unbounded();
  const auto rm = reflect_matrices(G, Rx, theta, spacing_ratio);
  const CVector dv = rm.d.cast<Complex>().cwiseProduct(v);

  const double q1 = v.dot(rm.R1 * v).real();     // v^H R1 v
  const double q2 = v.dot(rm.R2 * v).real();
  const double dq1 = dv.dot(rm.R1 * dv).real();  // v^H D R1 D v
  const double dq2 = dv.dot(rm.R2 * dv).real();
  const Complex x1 = dv.dot(rm.R1 * v);          // v^H D R1 v
  const Complex x2 = dv.dot(rm.R2 * v);
  if (!(q1 > 0.0) || !(q2 > 0.0)) return Crlb::unbounded();

  const double bracket = q2 * (dq1 - std::norm(x1) / q1) + q1 * (dq2 - std::norm(x2) / q2);
  const double leading = q2 * dq1 + q1 * dq2;
  if (!(bracket > kSingularityThreshold * leading)) return Crlb::unbounded();
  const double ratio = spacing_ratio;
  return Crlb::bounded(noise_power /
                       (8.0 * dwell_slots * std::norm(alpha) * kPi * kPi * ratio * ratio * c * c * bracket));
}

CrlbReport crlb_report(const FisherInfo& fisher) {
  CrlbReport rep;
  rep.fim = fisher;
  rep.crlb_theta = crlb_theta_closed_form(fisher);
  rep.identifiable = rep.crlb_theta.is_bounded();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(fisher.F, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = eig.eigenvalues()(0);
  return rep;
}

CrlbReport crlb_report(const ChannelRealization& channel, const CVector& v, const CMatrix& Rx, int dwell_slots,
                       double noise_power, double spacing_ratio) {
  return crlb_report(fisher_information(channel, v, Rx, dwell_slots, noise_power, spacing_ratio));
}

RankReport identifiability(const CMatrix& G) {
  RankReport rep;
  if (G.size() == 0) return rep;
  Eigen::JacobiSVD<CMatrix> svd(G);
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values(0);
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i)
    if (rep.singular_values(i) > 1e-10 * smax) ++rep.rank;
  rep.identifiable = rep.rank > 1;
  return rep;
}

}  // namespace irscrlb

#pragma once

#include <optional>
#include <ostream>

#include "irscrlb/scenario.hpp"
#include "irscrlb/sensing.hpp"

namespace irscrlb {

/// A Cramer-Rao bound that is either a finite variance (rad^2) or unbounded.
class Crlb {
 public:
  static Crlb bounded(double value) { return Crlb(value); }
  static Crlb unbounded() { return Crlb(); }

  bool is_bounded() const noexcept { return value_.has_value(); }
  /// Throws std::logic_error when unbounded.
  double value() const;
  /// +inf when unbounded; convenient for comparisons and tables.
  double value_or_inf() const noexcept;

  friend bool operator==(const Crlb&, const Crlb&) = default;

 private:
  Crlb() = default;
  explicit Crlb(double v) : value_(v) {}
  std::optional<double> value_;
};

std::ostream& operator<<(std::ostream& os, const Crlb& crlb);

/// Schur complement at or below this fraction of F_theta_theta is treated as
/// a singular FIM.
inline constexpr double kSingularityThreshold = 1e-8;

/// 3x3 real FIM over xi = [theta, Re alpha, Im alpha].
struct FisherInfo {
  Eigen::Matrix3d F = Eigen::Matrix3d::Zero();

  double theta_theta() const { return F(0, 0); }
  Eigen::RowVector2d theta_alpha() const { return F.block<1, 2>(0, 1); }
  Eigen::Matrix2d alpha_alpha() const { return F.block<2, 2>(1, 1); }
};

FisherInfo fisher_information(const CascadedResponse& response, Complex alpha, const CMatrix& Rx, int dwell_slots,
                              double noise_power);
FisherInfo fisher_information(const ChannelRealization& channel, const CVector& v, const CMatrix& Rx, int dwell_slots,
                              double noise_power, double spacing_ratio);

/// [F_tt - F_ta F_aa^{-1} F_ta^T]^{-1}; unbounded when F_aa vanishes or the
/// Schur complement falls under the singularity threshold.
Crlb crlb_theta_closed_form(const FisherInfo& fisher);

/// Direct trace form:
///   noise / (2 T |alpha|^2 (tr(B' Rx B'^H) - |tr(B Rx B'^H)|^2 / tr(B Rx B^H))).
Crlb crlb_theta(const CascadedResponse& response, Complex alpha, const CMatrix& Rx, int dwell_slots,
                double noise_power);

/// The same bound written as quadratic forms in the reflect vector v, using
/// R1, R2 and D. Unbounded at theta = +-pi/2.
Crlb crlb_theta_reflective_form(const CMatrix& G, const CMatrix& Rx, const CVector& v, double theta, Complex alpha,
                                int dwell_slots, double noise_power, double spacing_ratio);

/// The bracketed quantity in the transmit-side bound,
///   tr(B' Rx B'^H) - |tr(B Rx B'^H)|^2 / tr(B Rx B^H),
/// or 0 when tr(B Rx B^H) = 0.
double transmit_information(const CascadedResponse& response, const CMatrix& Rx);

struct CrlbReport {
  Crlb crlb_theta = Crlb::unbounded();
  bool identifiable = false;
  FisherInfo fim;
  double min_eigenvalue = 0.0;
};

CrlbReport crlb_report(const FisherInfo& fisher);
CrlbReport crlb_report(const ChannelRealization& channel, const CVector& v, const CMatrix& Rx, int dwell_slots,
                       double noise_power, double spacing_ratio);

struct RankReport {
  bool identifiable = false;
  int rank = 0;
  RVector singular_values;
};

/// Numerical rank of G with singular values below 1e-10 sigma_max treated as
/// zero. The DoA is identifiable iff rank(G) > 1.
RankReport identifiability(const CMatrix& G);

}  // namespace irscrlb

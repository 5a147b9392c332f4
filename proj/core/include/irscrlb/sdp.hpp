#pragma once

#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "irscrlb/types.hpp"

/// Small dense semidefinite programs over real scalars and complex Hermitian
/// matrix variables.
///
/// A Problem is built from affine expressions of the flattened real decision
/// vector. Every n x n Hermitian variable contributes n^2 real coordinates:
/// the n diagonal entries followed by (Re, Im) pairs of the strict upper
/// triangle in row-major order. Constraints are linear equalities (eliminated
/// through a null-space parametrization before solving), linear inequalities,
/// and PSD constraints on affine Hermitian matrices (enforced on the real
/// embedding [[Re Z, -Im Z], [Im Z, Re Z]] unless the matrix is real).
namespace irscrlb::sdp {

struct ScalarVar {
  int index = -1;
};

struct HermitianVar {
  int offset = -1;
  int dim = 0;
};

/// Real affine function constant + coeffs . x. Coefficient vectors shorter
/// than the decision vector are implicitly zero-padded.
struct LinearExpr {
  double constant = 0.0;
  RVector coeffs;

  LinearExpr() = default;
  LinearExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)

  double evaluate(const RVector& x) const;
  LinearExpr& operator+=(const LinearExpr& rhs);
  LinearExpr& operator-=(const LinearExpr& rhs);
  LinearExpr& operator*=(double s);
};

LinearExpr operator+(LinearExpr lhs, const LinearExpr& rhs);
LinearExpr operator-(LinearExpr lhs, const LinearExpr& rhs);
LinearExpr operator-(LinearExpr e);
LinearExpr operator*(double s, LinearExpr e);

/// Complex-valued affine function of the real decision vector.
struct ComplexExpr {
  Complex constant{0.0, 0.0};
  CVector coeffs;

  ComplexExpr() = default;
  ComplexExpr(const LinearExpr& e);  // NOLINT(google-explicit-constructor)
  ComplexExpr(Complex c) : constant(c) {}  // NOLINT(google-explicit-constructor)

  LinearExpr real() const;
  LinearExpr imag() const;
  ComplexExpr conj() const;
  Complex evaluate(const RVector& x) const;
  ComplexExpr& operator+=(const ComplexExpr& rhs);
  ComplexExpr& operator*=(Complex s);
};

ComplexExpr operator+(ComplexExpr lhs, const ComplexExpr& rhs);
ComplexExpr operator-(ComplexExpr lhs, const ComplexExpr& rhs);
ComplexExpr operator*(Complex s, ComplexExpr e);

/// Sparse affine Hermitian matrix constant + sum_k x_k coeff_k.
struct MatrixConstraint {
  int dim = 0;
  CMatrix constant;
  std::vector<std::pair<int, CMatrix>> terms;
};

class Problem {
 public:
  ScalarVar add_scalar();
  HermitianVar add_hermitian(int dim);
  int num_variables() const { return num_vars_; }

  LinearExpr expr(ScalarVar v) const;
  ComplexExpr entry(HermitianVar z, int i, int j) const;
  /// tr(W Z) for an arbitrary complex W.
  ComplexExpr trace_product(const CMatrix& W, HermitianVar z) const;
  LinearExpr trace(HermitianVar z) const;

  void maximize(const LinearExpr& objective);
  void minimize(const LinearExpr& objective);

  /// expr == 0
  void add_equality(const LinearExpr& expr);
  /// expr >= 0
  void add_inequality(const LinearExpr& expr);
  void add_psd(HermitianVar z);
  /// Hermitian matrix given by its upper triangle (row i, col j >= i);
  /// diagonal entries must be real-valued expressions.
  void add_psd(const std::vector<std::vector<ComplexExpr>>& upper);
  /// [[a11, a12], [conj(a12), a22]] >= 0
  void add_psd_2x2(const LinearExpr& a11, const ComplexExpr& a12, const LinearExpr& a22);

  const LinearExpr& objective() const { return objective_; }
  bool maximizing() const { return maximize_; }
  const std::vector<LinearExpr>& equalities() const { return equalities_; }
  const std::vector<LinearExpr>& inequalities() const { return inequalities_; }
  const std::vector<MatrixConstraint>& matrix_constraints() const { return lmis_; }

 private:
  int num_vars_ = 0;
  LinearExpr objective_;
  bool maximize_ = true;
  std::vector<LinearExpr> equalities_;
  std::vector<LinearExpr> inequalities_;
  std::vector<MatrixConstraint> lmis_;
};

enum class Status { optimal, infeasible, unbounded, numerical_failure };

std::string_view to_string(Status status);

struct Options {
  double tol = 1e-8;
  int max_iterations = 100;
};

struct Solution {
  Status status = Status::numerical_failure;
  RVector x;                  // full decision vector
  double objective = 0.0;     // objective at x, in the user's sense
  double dual_bound = 0.0;    // certified bound from the dual iterate
  double primal_residual = 0.0;  // worst PSD-constraint violation, scaled
  double dual_residual = 0.0;
  int iterations = 0;

  bool optimal() const { return status == Status::optimal; }
  /// |objective - dual_bound| / max(1, |objective|)
  double relative_gap() const;
  double value(ScalarVar v) const;
  CMatrix value(HermitianVar z) const;
};

/// Pluggable solver interface, so an external conic solver can replace the
/// built-in interior-point method.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Solution solve(const Problem& problem, const Options& options) const = 0;
  virtual std::string_view name() const = 0;
};

/// Primal-dual path-following method (HKM direction, Mehrotra
/// predictor-corrector) for block-diagonal dense cones.
class InteriorPointBackend final : public Backend {
 public:
  Solution solve(const Problem& problem, const Options& options) const override;
  std::string_view name() const override { return "dense-ipm"; }
};

const Backend& default_backend();

inline Solution solve(const Problem& problem, const Options& options = {}) {
  return default_backend().solve(problem, options);
}

/// Block-diagonal standard form
///   max  b^T w + offset   s.t.  S = C - sum_k w_k A_k >= 0,
/// with the user's decision vector recovered as x = x0 + N w.
struct StandardForm {
  std::vector<int> block_dims;
  std::vector<RMatrix> C;
  std::vector<std::vector<std::pair<int, RMatrix>>> A;  // per w_k: (block, matrix)
  RVector b;
  double offset = 0.0;
  double sign = 1.0;  // user objective = sign * (b^T w + offset)
  RVector x0;
  RMatrix null_basis;
  bool equalities_consistent = true;
  double equality_residual = 0.0;
};

StandardForm compile(const Problem& problem);

/// SDPA sparse format (min c^T w s.t. sum w_k F_k - F_0 >= 0) of the compiled
/// problem, for cross-checking against external solvers.
void write_sdpa(std::ostream& out, const StandardForm& form);

RMatrix real_embedding(const CMatrix& Z);
CMatrix from_real_embedding(const RMatrix& E);

}  // namespace irscrlb::sdp

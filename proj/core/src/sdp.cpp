#include "irscrlb/sdp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace irscrlb::sdp {

namespace {

void pad(RVector& v, Eigen::Index n) {
  if (v.size() < n) {
    const Eigen::Index old = v.size();
    v.conservativeResize(n);
    v.tail(n - old).setZero();
  }
}

void pad(CVector& v, Eigen::Index n) {
  if (v.size() < n) {
    const Eigen::Index old = v.size();
    v.conservativeResize(n);
    v.tail(n - old).setZero();
  }
}

RVector padded(const RVector& v, Eigen::Index n) {
  RVector out = v;
  pad(out, n);
  return out;
}

bool is_real(const CMatrix& m, double tol = 0.0) { return m.imag().cwiseAbs().maxCoeff() <= tol; }

}  // namespace

// ---------------------------------------------------------------- expressions

double LinearExpr::evaluate(const RVector& x) const {
  const Eigen::Index n = std::min(coeffs.size(), x.size());
  return constant + coeffs.head(n).dot(x.head(n));
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& rhs) {
  constant += rhs.constant;
  pad(coeffs, rhs.coeffs.size());
  coeffs.head(rhs.coeffs.size()) += rhs.coeffs;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& rhs) {
  constant -= rhs.constant;
  pad(coeffs, rhs.coeffs.size());
  coeffs.head(rhs.coeffs.size()) -= rhs.coeffs;
  return *this;
}

LinearExpr& LinearExpr::operator*=(double s) {
  constant *= s;
  coeffs *= s;
  return *this;
}

LinearExpr operator+(LinearExpr lhs, const LinearExpr& rhs) { return lhs += rhs; }
LinearExpr operator-(LinearExpr lhs, const LinearExpr& rhs) { return lhs -= rhs; }
LinearExpr operator-(LinearExpr e) { return e *= -1.0; }
LinearExpr operator*(double s, LinearExpr e) { return e *= s; }

ComplexExpr::ComplexExpr(const LinearExpr& e) : constant(e.constant), coeffs(e.coeffs.cast<Complex>()) {}

LinearExpr ComplexExpr::real() const {
  LinearExpr e;
  e.constant = constant.real();
  e.coeffs = coeffs.real();
  return e;
}

LinearExpr ComplexExpr::imag() const {
  LinearExpr e;
  e.constant = constant.imag();
  e.coeffs = coeffs.imag();
  return e;
}

ComplexExpr ComplexExpr::conj() const {
  ComplexExpr e;
  e.constant = std::conj(constant);
  e.coeffs = coeffs.conjugate();
  return e;
}

Complex ComplexExpr::evaluate(const RVector& x) const {
  const Eigen::Index n = std::min(coeffs.size(), x.size());
  return constant + (coeffs.head(n).transpose() * x.head(n).cast<Complex>())(0);
}

ComplexExpr& ComplexExpr::operator+=(const ComplexExpr& rhs) {
  constant += rhs.constant;
  pad(coeffs, rhs.coeffs.size());
  coeffs.head(rhs.coeffs.size()) += rhs.coeffs;
  return *this;
}

ComplexExpr& ComplexExpr::operator*=(Complex s) {
  constant *= s;
  coeffs *= s;
  return *this;
}

ComplexExpr operator+(ComplexExpr lhs, const ComplexExpr& rhs) { return lhs += rhs; }
ComplexExpr operator-(ComplexExpr lhs, const ComplexExpr& rhs) {
  ComplexExpr neg = rhs;
  neg *= -1.0;
  return lhs += neg;
}
ComplexExpr operator*(Complex s, ComplexExpr e) { return e *= s; }

// ---------------------------------------------------------------- problem

ScalarVar Problem::add_scalar() { return ScalarVar{num_vars_++}; }

HermitianVar Problem::add_hermitian(int dim) {
  if (dim <= 0) throw std::invalid_argument("add_hermitian: dimension must be positive");
  HermitianVar z{num_vars_, dim};
  num_vars_ += dim * dim;
  return z;
}

LinearExpr Problem::expr(ScalarVar v) const {
  LinearExpr e;
  e.coeffs = RVector::Zero(num_vars_);
  e.coeffs(v.index) = 1.0;
  return e;
}

namespace {

// Offset of the (Re, Im) pair for i < j within the variable block.
int upper_offset(int dim, int i, int j) {
  // pairs are enumerated row-major over the strict upper triangle
  const int before = i * dim - i * (i + 1) / 2;  // entries in rows < i
  return dim + 2 * (before + (j - i - 1));
}

}  // namespace

ComplexExpr Problem::entry(HermitianVar z, int i, int j) const {
  ComplexExpr e;
  e.coeffs = CVector::Zero(num_vars_);
  if (i == j) {
    e.coeffs(z.offset + i) = 1.0;
  } else if (i < j) {
    const int p = z.offset + upper_offset(z.dim, i, j);
    e.coeffs(p) = 1.0;
    e.coeffs(p + 1) = Complex(0.0, 1.0);
  } else {
    const int p = z.offset + upper_offset(z.dim, j, i);
    e.coeffs(p) = 1.0;
    e.coeffs(p + 1) = Complex(0.0, -1.0);
  }
  return e;
}

ComplexExpr Problem::trace_product(const CMatrix& W, HermitianVar z) const {
  if (W.rows() != z.dim || W.cols() != z.dim) throw std::invalid_argument("trace_product: dimension mismatch");
  ComplexExpr e;
  e.coeffs = CVector::Zero(num_vars_);
  const Complex j1(0.0, 1.0);
  for (int i = 0; i < z.dim; ++i) e.coeffs(z.offset + i) = W(i, i);
  for (int i = 0; i < z.dim; ++i) {
    for (int k = i + 1; k < z.dim; ++k) {
      const int p = z.offset + upper_offset(z.dim, i, k);
      // tr(W Z) picks W(i,k) Z(k,i) + W(k,i) Z(i,k)
      e.coeffs(p) = W(k, i) + W(i, k);
      e.coeffs(p + 1) = j1 * (W(k, i) - W(i, k));
    }
  }
  return e;
}

LinearExpr Problem::trace(HermitianVar z) const {
  LinearExpr e;
  e.coeffs = RVector::Zero(num_vars_);
  for (int i = 0; i < z.dim; ++i) e.coeffs(z.offset + i) = 1.0;
  return e;
}

void Problem::maximize(const LinearExpr& objective) {
  objective_ = objective;
  maximize_ = true;
}

void Problem::minimize(const LinearExpr& objective) {
  objective_ = objective;
  maximize_ = false;
}

void Problem::add_equality(const LinearExpr& expr) { equalities_.push_back(expr); }
void Problem::add_inequality(const LinearExpr& expr) { inequalities_.push_back(expr); }

void Problem::add_psd(HermitianVar z) {
  MatrixConstraint c;
  c.dim = z.dim;
  c.constant = CMatrix::Zero(z.dim, z.dim);
  const Complex j1(0.0, 1.0);
  for (int i = 0; i < z.dim; ++i) {
    CMatrix e = CMatrix::Zero(z.dim, z.dim);
    e(i, i) = 1.0;
    c.terms.emplace_back(z.offset + i, std::move(e));
  }
  for (int i = 0; i < z.dim; ++i) {
    for (int k = i + 1; k < z.dim; ++k) {
      const int p = z.offset + upper_offset(z.dim, i, k);
      CMatrix re = CMatrix::Zero(z.dim, z.dim);
      re(i, k) = re(k, i) = 1.0;
      CMatrix im = CMatrix::Zero(z.dim, z.dim);
      im(i, k) = j1;
      im(k, i) = -j1;
      c.terms.emplace_back(p, std::move(re));
      c.terms.emplace_back(p + 1, std::move(im));
    }
  }
  lmis_.push_back(std::move(c));
}

void Problem::add_psd(const std::vector<std::vector<ComplexExpr>>& upper) {
  const int n = static_cast<int>(upper.size());
  if (n == 0) throw std::invalid_argument("add_psd: empty matrix");
  MatrixConstraint c;
  c.dim = n;
  c.constant = CMatrix::Zero(n, n);
  Eigen::Index width = 0;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(upper[i].size()) != n - i) {
      throw std::invalid_argument("add_psd: row " + std::to_string(i) + " must hold the upper triangle");
    }
    for (const auto& e : upper[i]) width = std::max(width, e.coeffs.size());
  }
  std::vector<CMatrix> dense(width, CMatrix());
  for (int i = 0; i < n; ++i) {
    for (int k = i; k < n; ++k) {
      const ComplexExpr& e = upper[i][k - i];
      Complex c0 = e.constant;
      if (i == k) c0 = c0.real();
      c.constant(i, k) = c0;
      c.constant(k, i) = std::conj(c0);
      for (Eigen::Index p = 0; p < e.coeffs.size(); ++p) {
        Complex v = e.coeffs(p);
        if (v == Complex(0.0)) continue;
        if (i == k) v = v.real();
        if (dense[p].size() == 0) dense[p] = CMatrix::Zero(n, n);
        dense[p](i, k) += v;
        if (i != k) dense[p](k, i) += std::conj(v);
      }
    }
  }
  for (Eigen::Index p = 0; p < width; ++p)
    if (dense[p].size() != 0) c.terms.emplace_back(static_cast<int>(p), std::move(dense[p]));
  lmis_.push_back(std::move(c));
}

void Problem::add_psd_2x2(const LinearExpr& a11, const ComplexExpr& a12, const LinearExpr& a22) {
  add_psd({{ComplexExpr(a11), a12}, {ComplexExpr(a22)}});
}

// ---------------------------------------------------------------- solution

std::string_view to_string(Status status) {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

double Solution::relative_gap() const {
  return std::abs(objective - dual_bound) / std::max(1.0, std::abs(objective));
}

double Solution::value(ScalarVar v) const { return x(v.index); }

CMatrix Solution::value(HermitianVar z) const {
  CMatrix out(z.dim, z.dim);
  for (int i = 0; i < z.dim; ++i) out(i, i) = x(z.offset + i);
  for (int i = 0; i < z.dim; ++i) {
    for (int k = i + 1; k < z.dim; ++k) {
      const int p = z.offset + upper_offset(z.dim, i, k);
      out(i, k) = Complex(x(p), x(p + 1));
      out(k, i) = Complex(x(p), -x(p + 1));
    }
  }
  return out;
}

// ---------------------------------------------------------------- embedding

RMatrix real_embedding(const CMatrix& Z) {
  const Eigen::Index n = Z.rows();
  RMatrix E(2 * n, 2 * n);
  E.topLeftCorner(n, n) = Z.real();
  E.topRightCorner(n, n) = -Z.imag();
  E.bottomLeftCorner(n, n) = Z.imag();
  E.bottomRightCorner(n, n) = Z.real();
  return E;
}

CMatrix from_real_embedding(const RMatrix& E) {
  const Eigen::Index n = E.rows() / 2;
  CMatrix Z(n, n);
  Z.real() = E.topLeftCorner(n, n);
  Z.imag() = E.bottomLeftCorner(n, n);
  return Z;
}

// ---------------------------------------------------------------- compile

StandardForm compile(const Problem& problem) {
  const int n = problem.num_variables();
  StandardForm form;
  form.sign = problem.maximizing() ? 1.0 : -1.0;
  const RVector c = form.sign * padded(problem.objective().coeffs, n);
  const double c0 = form.sign * problem.objective().constant;

  // Equalities E x + e0 = 0, eliminated as x = x0 + N w.
  const auto& eqs = problem.equalities();
  if (eqs.empty()) {
    form.x0 = RVector::Zero(n);
    form.null_basis = RMatrix::Identity(n, n);
  } else {
    RMatrix E(eqs.size(), n);
    RVector f(eqs.size());
    for (std::size_t i = 0; i < eqs.size(); ++i) {
      E.row(i) = padded(eqs[i].coeffs, n).transpose();
      f(i) = -eqs[i].constant;
    }
    Eigen::JacobiSVD<RMatrix> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-12 * std::max(1.0, smax)) ++rank;
    RVector x0 = RVector::Zero(n);
    const RVector ut_f = svd.matrixU().transpose() * f;
    for (Eigen::Index i = 0; i < rank; ++i) x0 += svd.matrixV().col(i) * (ut_f(i) / sv(i));
    form.x0 = x0;
    form.equality_residual = (E * x0 - f).norm();
    form.equalities_consistent = form.equality_residual <= 1e-9 * (1.0 + f.norm());
    form.null_basis = svd.matrixV().rightCols(n - rank);
  }
  const RMatrix& Nb = form.null_basis;
  const Eigen::Index m = Nb.cols();
  form.b = Nb.transpose() * c;
  form.offset = c0 + c.dot(form.x0);
  form.A.assign(m, {});

  // Each constraint becomes one block with affine real matrix F0 + sum_i x_i F_i.
  auto add_block = [&](const RMatrix& F0, const std::vector<std::pair<int, RMatrix>>& terms) {
    const int blk = static_cast<int>(form.block_dims.size());
    const Eigen::Index d = F0.rows();
    form.block_dims.push_back(static_cast<int>(d));
    RMatrix C = F0;
    for (const auto& [i, Fi] : terms) C += form.x0(i) * Fi;
    form.C.push_back(std::move(C));
    for (Eigen::Index k = 0; k < m; ++k) {
      RMatrix Ak = RMatrix::Zero(d, d);
      bool any = false;
      for (const auto& [i, Fi] : terms) {
        const double z = Nb(i, k);
        if (z == 0.0) continue;
        Ak.noalias() -= z * Fi;
        any = true;
      }
      if (any && Ak.cwiseAbs().maxCoeff() > 0.0) form.A[k].emplace_back(blk, std::move(Ak));
    }
  };

  for (const auto& ineq : problem.inequalities()) {
    RMatrix F0(1, 1);
    F0(0, 0) = ineq.constant;
    std::vector<std::pair<int, RMatrix>> terms;
    for (Eigen::Index i = 0; i < ineq.coeffs.size(); ++i) {
      if (ineq.coeffs(i) == 0.0) continue;
      RMatrix Fi(1, 1);
      Fi(0, 0) = ineq.coeffs(i);
      terms.emplace_back(static_cast<int>(i), std::move(Fi));
    }
    add_block(F0, terms);
  }
  for (const auto& lmi : problem.matrix_constraints()) {
    bool real = is_real(lmi.constant);
    for (const auto& t : lmi.terms) real = real && is_real(t.second);
    std::vector<std::pair<int, RMatrix>> terms;
    terms.reserve(lmi.terms.size());
    if (real) {
      for (const auto& [i, Fi] : lmi.terms) terms.emplace_back(i, Fi.real());
      add_block(lmi.constant.real(), terms);
    } else {
      for (const auto& [i, Fi] : lmi.terms) terms.emplace_back(i, real_embedding(Fi));
      add_block(real_embedding(lmi.constant), terms);
    }
  }
  return form;
}

void write_sdpa(std::ostream& out, const StandardForm& form) {
  // SDPA: min c^T w  s.t.  sum_k w_k F_k - F_0 >= 0.
  // Ours: max b^T w  s.t.  C - sum_k w_k A_k >= 0  =>  c = -b, F_0 = -C, F_k = -A_k.
  const auto old_precision = out.precision(17);
  out << "\"irscrlb sdp dump; objective offset " << form.offset << ", sign " << form.sign << "\"\n";
  out << form.b.size() << "\n" << form.block_dims.size() << "\n";
  for (std::size_t i = 0; i < form.block_dims.size(); ++i) out << form.block_dims[i] << (i + 1 < form.block_dims.size() ? " " : "\n");
  for (Eigen::Index k = 0; k < form.b.size(); ++k) out << -form.b(k) << (k + 1 < form.b.size() ? " " : "\n");
  auto emit = [&](std::size_t mat, int blk, const RMatrix& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = i; j < M.cols(); ++j)
        if (M(i, j) != 0.0) out << mat << ' ' << blk + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << -M(i, j) << '\n';
  };
  for (std::size_t blk = 0; blk < form.C.size(); ++blk) emit(0, static_cast<int>(blk), form.C[blk]);
  for (std::size_t k = 0; k < form.A.size(); ++k)
    for (const auto& [blk, M] : form.A[k]) emit(k + 1, blk, M);
  out.precision(old_precision);
}

}  // namespace irscrlb::sdp

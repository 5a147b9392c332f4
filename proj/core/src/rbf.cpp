#include "irscrlb/rbf.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace irscrlb {

namespace {

// Quadratic forms below this fraction of |R| |v|^2 count as zero.
constexpr double kDegenerate = 1e-12;

bool vanishes(double q, const CMatrix& R, double v_energy) { return !(q > kDegenerate * R.norm() * v_energy); }

// tr(M V)
Complex tr(const CMatrix& M, const CMatrix& V) { return M.cwiseProduct(V.transpose()).sum(); }

struct Parts {
  CMatrix DR1D, DR2D, DR1, DR2;
};

Parts parts(const ReflectMatrices& rm) {
  const auto D = rm.d.cast<Complex>().asDiagonal();
  Parts p;
  p.DR1 = D * rm.R1;
  p.DR2 = D * rm.R2;
  p.DR1D = p.DR1 * D;
  p.DR2D = p.DR2 * D;
  return p;
}

// The four squared-linear terms of f1 and of f2.
std::array<double, 4> g_terms(const LiftedReflector& x, const ReflectMatrices& rm, const Parts& p) {
  const double r1 = tr(rm.R1, x.V).real();
  const double r2 = tr(rm.R2, x.V).real();
  return {tr(rm.R2 + p.DR1D, x.V).real(), r2 - x.t1, tr(rm.R1 + p.DR2D, x.V).real(), r1 - x.t2};
}

std::array<double, 4> h_terms(const LiftedReflector& x, const ReflectMatrices& rm, const Parts& p) {
  const double r1 = tr(rm.R1, x.V).real();
  const double r2 = tr(rm.R2, x.V).real();
  return {tr(rm.R2 - p.DR1D, x.V).real(), r2 + x.t1, tr(rm.R1 - p.DR2D, x.V).real(), r1 + x.t2};
}

LiftedReflector lift_matrix(const CMatrix& V, const ReflectMatrices& rm, const Parts& p) {
  const double q1 = tr(rm.R1, V).real();
  const double q2 = tr(rm.R2, V).real();
  const double energy = V.trace().real();
  if (vanishes(q1, rm.R1, energy) || vanishes(q2, rm.R2, energy)) throw DegenerateReflector("reflector carries no energy through the cascade");
  return {V, std::norm(tr(p.DR1, V)) / q1, std::norm(tr(p.DR2, V)) / q2};
}

ReflectMatrices normalized(ReflectMatrices rm) {
  const double n1 = rm.R1.norm();
  const double n2 = rm.R2.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw DegenerateReflector("R1 or R2 vanishes");
  rm.R1 /= n1;
  rm.R2 /= n2;
  rm.d.array() -= 0.5 * static_cast<double>(rm.d.size() - 1);
  return rm;
}

}  // namespace

double reflect_objective(const CVector& v, const ReflectMatrices& rm) {
  const CVector dv = rm.d.cast<Complex>().cwiseProduct(v);
  const CVector r1v = rm.R1 * v;
  const CVector r2v = rm.R2 * v;
  const double q1 = v.dot(r1v).real();
  const double q2 = v.dot(r2v).real();
  const double energy = v.squaredNorm();
  if (vanishes(q1, rm.R1, energy) || vanishes(q2, rm.R2, energy)) throw DegenerateReflector("reflector carries no energy through the cascade");
  const double dq1 = dv.dot(rm.R1 * dv).real();
  const double dq2 = dv.dot(rm.R2 * dv).real();
  const Complex x1 = dv.dot(r1v);
  const Complex x2 = dv.dot(r2v);
  return q2 * (dq1 - std::norm(x1) / q1) + q1 * (dq2 - std::norm(x2) / q2);
}

LiftedReflector tight_lift(const CVector& v, const ReflectMatrices& rm) {
  return lift_matrix(v * v.adjoint(), rm, parts(rm));
}

F1F2 split_f1_f2(const LiftedReflector& x, const ReflectMatrices& rm) {
  const Parts p = parts(rm);
  F1F2 out;
  for (double g : g_terms(x, rm, p)) out.f1 += 0.25 * g * g;
  for (double h : h_terms(x, rm, p)) out.f2 -= 0.25 * h * h;
  return out;
}

double lifted_objective(const LiftedReflector& x, const ReflectMatrices& rm) {
  const Parts p = parts(rm);
  return tr(rm.R2, x.V).real() * (tr(p.DR1D, x.V).real() - x.t1) +
         tr(rm.R1, x.V).real() * (tr(p.DR2D, x.V).real() - x.t2);
}

double f1_tangent(const LiftedReflector& x, const LiftedReflector& at, const ReflectMatrices& rm) {
  const Parts p = parts(rm);
  const auto g0 = g_terms(at, rm, p);
  const auto g = g_terms(x, rm, p);
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += 0.25 * (2.0 * g0[k] * g[k] - g0[k] * g0[k]);
  return s;
}

ScaResult sca_solve(const ReflectMatrices& rm, const LiftedReflector& init, const ScaOptions& options,
                    const sdp::Backend& backend) {
  const Parts p = parts(rm);
  const int n = static_cast<int>(rm.R1.rows());
  ScaResult out;
  out.x = init;
  double current = lifted_objective(init, rm);
  out.trace.objective.push_back(current);

  for (int r = 0; r < options.max_iterations; ++r) {
    sdp::Problem prob;
    const auto V = prob.add_hermitian(n);
    const auto t1 = prob.add_scalar();
    const auto t2 = prob.add_scalar();
    prob.add_psd(V);
    for (int i = 0; i < n; ++i) prob.add_equality(prob.entry(V, i, i).real() - 1.0);
    prob.add_psd_2x2(prob.expr(t1), prob.trace_product(p.DR1, V), prob.trace_product(rm.R1, V).real());
    prob.add_psd_2x2(prob.expr(t2), prob.trace_product(p.DR2, V), prob.trace_product(rm.R2, V).real());

    auto lin = [&](const CMatrix& M) { return prob.trace_product(M, V).real(); };
    const std::array<sdp::LinearExpr, 4> g = {lin(rm.R2 + p.DR1D), lin(rm.R2) - prob.expr(t1),
                                              lin(rm.R1 + p.DR2D), lin(rm.R1) - prob.expr(t2)};
    const std::array<sdp::LinearExpr, 4> h = {lin(rm.R2 - p.DR1D), lin(rm.R2) + prob.expr(t1),
                                              lin(rm.R1 - p.DR2D), lin(rm.R1) + prob.expr(t2)};
    const auto g0 = g_terms(out.x, rm, p);
    const auto h0 = h_terms(out.x, rm, p);

    sdp::LinearExpr objective;
    for (int k = 0; k < 4; ++k) objective += 0.25 * (2.0 * g0[k] * g[k] - g0[k] * g0[k]);
    for (int k = 0; k < 4; ++k) {
      // u >= (h / s)^2 keeps the epigraph block well scaled.
      const double s = std::max(1.0, std::abs(h0[k]));
      const auto u = prob.add_scalar();
      prob.add_psd_2x2(prob.expr(u), sdp::ComplexExpr((1.0 / s) * h[k]), 1.0);
      objective -= (0.25 * s * s) * prob.expr(u);
    }
    prob.maximize(objective);

    const auto sol = backend.solve(prob, options.solver);
    out.trace.iterations = r + 1;
    out.trace.gaps.push_back(sol.relative_gap());
    if (!sol.optimal()) {
      out.trace.failed = true;
      break;
    }
    CMatrix Vn = sol.value(V);
    Vn = 0.5 * (Vn + Vn.adjoint());
    LiftedReflector next;
    try {
      next = lift_matrix(Vn, rm, p);
    } catch (const DegenerateReflector&) {
      out.trace.failed = true;
      break;
    }
    const double value = lifted_objective(next, rm);
    if (!(value > current)) {
      out.trace.converged = true;
      break;
    }
    const double gain = (value - current) / std::max(std::abs(current), 1e-300);
    out.x = next;
    current = value;
    out.trace.objective.push_back(current);
    if (gain < options.rel_tol) {
      out.trace.converged = true;
      break;
    }
  }
  return out;
}

CVector gaussian_randomize(const CMatrix& V, const std::function<double(const CVector&)>& score, int num_samples,
                           Rng& rng) {
  const Eigen::Index n = V.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (V + V.adjoint()));
  // Eigenvalues at roundoff level would otherwise leak O(sqrt(eps)) phase noise.
  const RVector lambda = eig.eigenvalues();
  const double floor = 1e-12 * std::max(lambda(n - 1), 0.0);
  const RVector root = lambda.unaryExpr([floor](double l) { return l > floor ? std::sqrt(l) : 0.0; });
  const CMatrix L = eig.eigenvectors() * root.cast<Complex>().asDiagonal();

  CVector best;
  double best_score = -std::numeric_limits<double>::infinity();
  auto consider = [&](const CVector& cand) {
    double s;
    try {
      s = score(cand);
    } catch (const DegenerateReflector&) {
      return;
    }
    if (std::isfinite(s) && (best.size() == 0 || s > best_score)) {
      best = cand;
      best_score = s;
    }
  };

  consider(unit_modulus(eig.eigenvectors().col(n - 1)));
  CVector xi(n);
  for (int k = 0; k < num_samples; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) xi(i) = standard_complex_normal(rng);
    consider(unit_modulus(L * xi));
  }
  if (best.size() == 0) throw DegenerateReflector("every randomization candidate is degenerate");
  return best;
}

CVector gaussian_randomize(const CMatrix& V, const ReflectMatrices& rm, int num_samples, Rng& rng) {
  return gaussian_randomize(V, [&rm](const CVector& v) { return reflect_objective(v, rm); }, num_samples, rng);
}

CMatrix unit_diagonal_sdr(const CMatrix& Q, const sdp::Backend& backend, const sdp::Options& options) {
  const int n = static_cast<int>(Q.rows());
  const double scale = Q.norm();
  sdp::Problem prob;
  const auto V = prob.add_hermitian(n);
  prob.add_psd(V);
  for (int i = 0; i < n; ++i) prob.add_equality(prob.entry(V, i, i).real() - 1.0);
  prob.maximize(prob.trace_product(scale > 0.0 ? CMatrix(Q / scale) : Q, V).real());
  const auto sol = backend.solve(prob, options);
  if (!sol.optimal()) {
    throw std::runtime_error(std::string("unit_diagonal_sdr: SDP backend returned ") +
                             std::string(sdp::to_string(sol.status)));
  }
  CMatrix out = sol.value(V);
  return 0.5 * (out + out.adjoint());
}

ReflectResult optimize_reflect(const CMatrix& G, const CMatrix& Rx, double theta, double spacing_ratio,
                               const CVector& incumbent, Rng& rng, const ReflectOptions& options,
                               const sdp::Backend& backend) {
  const ReflectMatrices rm = normalized(reflect_matrices(G, Rx, theta, spacing_ratio));
  const Parts p = parts(rm);

  ReflectResult out;
  out.v = incumbent;
  out.kept_incumbent = true;
  double incumbent_value = -std::numeric_limits<double>::infinity();
  LiftedReflector init;
  try {
    incumbent_value = reflect_objective(incumbent, rm);
    init = lift_matrix(incumbent * incumbent.adjoint(), rm, p);
  } catch (const DegenerateReflector&) {
    init = lift_matrix(CMatrix::Identity(rm.R1.rows(), rm.R1.cols()), rm, p);
  }
  out.objective = incumbent_value;

  out.sca = sca_solve(rm, init, options.sca, backend);
  const CVector cand = gaussian_randomize(out.sca.x.V, rm, options.randomization_samples, rng);
  const double value = reflect_objective(cand, rm);
  if (value > incumbent_value) {
    out.v = cand;
    out.objective = value;
    out.kept_incumbent = false;
  }
  return out;
}

}  // namespace irscrlb

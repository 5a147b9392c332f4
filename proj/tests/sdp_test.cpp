#include <sstream>

#include <gtest/gtest.h>

#include "irscrlb/sdp.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace irscrlb::sdp {
namespace {

using irscrlb::testing::random_hermitian;

// max tr(C X) s.t. tr(X) = 1, X >= 0  has optimum lambda_max(C).
Solution eigenvalue_sdp(const CMatrix& C, HermitianVar* out_var = nullptr) {
  Problem p;
  auto X = p.add_hermitian(static_cast<int>(C.rows()));
  p.maximize(p.trace_product(C, X).real());
  p.add_equality(p.trace(X) - 1.0);
  p.add_psd(X);
  if (out_var) *out_var = X;
  return solve(p);
}

TEST(Sdp, EigenvalueProblemMatchesLambdaMax) {
  Rng rng(11);
  for (int n : {2, 3, 5, 8}) {
    const CMatrix C = random_hermitian(n, rng);
    HermitianVar X;
    const auto sol = eigenvalue_sdp(C, &X);
    ASSERT_EQ(sol.status, Status::optimal) << n;
    const double lmax = oracle::lambda_max(C);
    EXPECT_NEAR(sol.objective, lmax, 1e-7 * std::max(1.0, std::abs(lmax)));
    // Optimal X is the top eigenvector outer product.
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(C);
    const CVector u = eig.eigenvectors().col(n - 1);
    const CMatrix Xv = sol.value(X);
    EXPECT_NEAR((Xv - u * u.adjoint()).norm(), 0.0, 1e-4);
  }
}

TEST(Sdp, UnitDiagonalFeasibility) {
  Problem p;
  auto X = p.add_hermitian(2);
  p.add_psd(X);
  for (int i = 0; i < 2; ++i) p.add_equality(p.entry(X, i, i).real() - 1.0);
  p.maximize(LinearExpr(0.0));
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, Status::optimal);
  const CMatrix V = sol.value(X);
  EXPECT_NEAR(V(0, 0).real(), 1.0, 1e-9);
  EXPECT_NEAR(V(1, 1).real(), 1.0, 1e-9);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(V, Eigen::EigenvaluesOnly);
  EXPECT_GE(eig.eigenvalues()(0), -1e-8);
}

TEST(Sdp, SchurComplementBlockGivesQuadraticOverLinear) {
  // max t  s.t. [[a - t, c], [c*, d]] >= 0   =>  t = a - |c|^2 / d
  const double a = 3.0, d = 2.0;
  const Complex c(1.0, -0.5);
  Problem p;
  auto t = p.add_scalar();
  p.maximize(p.expr(t));
  p.add_psd_2x2(LinearExpr(a) - p.expr(t), ComplexExpr(c), LinearExpr(d));
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, Status::optimal);
  EXPECT_NEAR(sol.value(t), a - std::norm(c) / d, 1e-7);
}

TEST(Sdp, LinearInequalitiesAndMinimize) {
  Problem p;
  auto x = p.add_scalar();
  auto y = p.add_scalar();
  p.minimize(p.expr(x) + 2.0 * p.expr(y));
  p.add_inequality(p.expr(x) - 1.0);                 // x >= 1
  p.add_inequality(p.expr(y) + p.expr(x) - 3.0);     // x + y >= 3
  p.add_inequality(p.expr(y));                       // y >= 0
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, Status::optimal);
  EXPECT_NEAR(sol.value(x), 3.0, 1e-6);
  EXPECT_NEAR(sol.value(y), 0.0, 1e-6);
  EXPECT_NEAR(sol.objective, 3.0, 1e-7);
}

TEST(Sdp, DetectsInfeasibility) {
  Problem p;
  auto X = p.add_hermitian(3);
  p.add_psd(X);
  p.add_equality(p.trace(X) + 1.0);  // tr X = -1
  p.maximize(p.entry(X, 0, 1).real());
  EXPECT_EQ(solve(p).status, Status::infeasible);

  Problem q;
  auto x = q.add_scalar();
  q.add_inequality(q.expr(x) - 2.0);
  q.add_inequality(1.0 - q.expr(x));
  q.maximize(q.expr(x));
  EXPECT_EQ(solve(q).status, Status::infeasible);
}

TEST(Sdp, DetectsUnboundedness) {
  Problem p;
  auto X = p.add_hermitian(2);
  p.add_psd(X);
  p.maximize(p.trace(X));
  EXPECT_EQ(solve(p).status, Status::unbounded);
}

TEST(Sdp, IterationLimitReportsNumericalFailureWithResiduals) {
  Rng rng(3);
  Problem p;
  auto X = p.add_hermitian(4);
  p.maximize(p.trace_product(random_hermitian(4, rng), X).real());
  p.add_equality(p.trace(X) - 1.0);
  p.add_psd(X);
  const auto sol = solve(p, Options{1e-8, 2});
  EXPECT_EQ(sol.status, Status::numerical_failure);
  EXPECT_GT(std::max({sol.relative_gap(), sol.dual_residual, sol.primal_residual}), 0.0);
}

TEST(Sdp, CertifiedGap) {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto sol = eigenvalue_sdp(random_hermitian(6, rng));
    ASSERT_TRUE(sol.optimal());
    EXPECT_LE(std::abs(sol.objective - sol.dual_bound), 10 * 1e-8 * std::max(1.0, std::abs(sol.objective)));
    EXPECT_LE(sol.primal_residual, 1e-8);
  }
}

TEST(Sdp, RealEmbeddingRoundTripAndSpectrum) {
  Rng rng(7);
  const CMatrix Z = random_hermitian(5, rng);
  const RMatrix E = real_embedding(Z);
  EXPECT_EQ(from_real_embedding(E), Z);
  // Each eigenvalue of Z appears twice in the embedding.
  Eigen::SelfAdjointEigenSolver<CMatrix> ez(Z, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<RMatrix> ee(E, Eigen::EigenvaluesOnly);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(ee.eigenvalues()(2 * i), ez.eigenvalues()(i), 1e-12);
    EXPECT_NEAR(ee.eigenvalues()(2 * i + 1), ez.eigenvalues()(i), 1e-12);
  }
}

TEST(Sdp, HermitianParametrizationRoundTrip) {
  Rng rng(9);
  Problem p;
  p.add_scalar();
  auto Z = p.add_hermitian(4);
  const CMatrix target = random_hermitian(4, rng);
  const CMatrix W = random_hermitian(4, rng) + Complex(0, 1) * random_hermitian(4, rng);
  Solution s;
  s.x = RVector::Zero(p.num_variables());
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const auto e = p.entry(Z, i, j);
      for (Eigen::Index k = 0; k < e.coeffs.size(); ++k) {
        if (e.coeffs(k) == Complex(1.0)) s.x(k) = target(i, j).real();
        if (e.coeffs(k) == Complex(0.0, 1.0)) s.x(k) = target(i, j).imag();
      }
    }
  EXPECT_NEAR((s.value(Z) - target).norm(), 0.0, 1e-15);
  const Complex tr = p.trace_product(W, Z).evaluate(s.x);
  const Complex direct = (W * target).trace();
  EXPECT_NEAR(std::abs(tr - direct), 0.0, 1e-12);
}

TEST(Sdp, SdpaDumpHasHeaderAndEntries) {
  Problem p;
  auto X = p.add_hermitian(2);
  p.add_psd(X);
  p.add_equality(p.trace(X) - 1.0);
  p.maximize(p.entry(X, 0, 0).real());
  const auto form = compile(p);
  std::ostringstream ss;
  write_sdpa(ss, form);
  std::istringstream in(ss.str());
  std::string comment;
  std::getline(in, comment);
  int m = 0, nblocks = 0, dim = 0;
  in >> m >> nblocks >> dim;
  EXPECT_EQ(m, 3);  // 4 real parameters minus one equality
  EXPECT_EQ(nblocks, 1);
  EXPECT_EQ(dim, 4);  // complex 2x2 -> real 4x4
}

}  // namespace
}  // namespace irscrlb::sdp

#include <algorithm>
#include <cmath>
#include <limits>

#include "irscrlb/sdp.hpp"

namespace irscrlb::sdp {

namespace {

using Blocks = std::vector<RMatrix>;

double inner(const Blocks& P, const Blocks& Q) {
  double s = 0.0;
  for (std::size_t b = 0; b < P.size(); ++b) s += P[b].cwiseProduct(Q[b]).sum();
  return s;
}

double frob(const Blocks& P) { return std::sqrt(inner(P, P)); }

RMatrix sym(const RMatrix& M) { return 0.5 * (M + M.transpose()); }

class Ipm {
 public:
  // Each w_k is rescaled so that its constraint matrix has unit norm; this
  // keeps the residuals and the Schur matrix independent of how the user
  // scaled the problem data.
  Ipm(const StandardForm& f, const Options& o)
      : user_(f), f_(f), opt_(o), m_(f.b.size()), nb_(f.block_dims.size()), scale_(RVector::Ones(f.b.size())) {
    for (int d : f.block_dims) n_ += d;
    for (Eigen::Index k = 0; k < m_; ++k) {
      double nrm = 0.0;
      for (const auto& [blk, Ak] : f_.A[k]) nrm += Ak.squaredNorm();
      if (nrm > 0.0) scale_(k) = std::sqrt(nrm);
      for (auto& [blk, Ak] : f_.A[k]) Ak /= scale_(k);
      f_.b(k) /= scale_(k);
    }
  }

  Solution run();

 private:
  // A(Z)_k = sum_b tr(A_kb Z_b); Z_b need not be symmetric.
  RVector apply_A(const Blocks& Z) const {
    RVector out = RVector::Zero(m_);
    for (Eigen::Index k = 0; k < m_; ++k)
      for (const auto& [blk, Ak] : f_.A[k]) out(k) += Ak.cwiseProduct(Z[blk].transpose()).sum();
    return out;
  }

  Blocks apply_At(const RVector& y) const {
    Blocks out;
    out.reserve(nb_);
    for (int d : f_.block_dims) out.push_back(RMatrix::Zero(d, d));
    for (Eigen::Index k = 0; k < m_; ++k)
      for (const auto& [blk, Ak] : f_.A[k]) out[blk].noalias() += y(k) * Ak;
    return out;
  }

  // Largest step a in (0, inf] with P + a dP >= 0, for P > 0.
  static double max_step(const Blocks& P, const Blocks& dP) {
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < P.size(); ++b) {
      Eigen::LLT<RMatrix> llt(P[b]);
      if (llt.info() != Eigen::Success) return 0.0;
      RMatrix T = llt.matrixL().solve(dP[b]);
      T = llt.matrixL().solve(T.transpose()).transpose();
      Eigen::SelfAdjointEigenSolver<RMatrix> eig(sym(T), Eigen::EigenvaluesOnly);
      const double lmin = eig.eigenvalues()(0);
      if (lmin < 0.0) step = std::min(step, -1.0 / lmin);
    }
    return step;
  }

  void initial_point();
  bool polish(const RVector& rp);
  Solution finish(Status status, int iterations) const;

  const StandardForm& user_;
  StandardForm f_;
  Options opt_;
  Eigen::Index m_;
  std::size_t nb_;
  int n_ = 0;
  Blocks X_, S_;
  RVector scale_;
  RVector y_;
};

void Ipm::initial_point() {
  X_.clear();
  S_.clear();
  std::vector<double> max_norm(nb_, 0.0);
  std::vector<double> max_ratio(nb_, 0.0);
  for (Eigen::Index k = 0; k < m_; ++k) {
    for (const auto& [blk, Ak] : f_.A[k]) {
      const double a = Ak.norm();
      max_norm[blk] = std::max(max_norm[blk], a);
      max_ratio[blk] = std::max(max_ratio[blk], (1.0 + std::abs(f_.b(k))) / (1.0 + a));
    }
  }
  for (std::size_t b = 0; b < nb_; ++b) {
    const double d = f_.block_dims[b];
    const double xi = std::max({10.0, std::sqrt(d), d * max_ratio[b]});
    const double eta = std::max({10.0, std::sqrt(d), max_norm[b], f_.C[b].norm()});
    X_.push_back(xi * RMatrix::Identity(f_.block_dims[b], f_.block_dims[b]));
    S_.push_back(eta * RMatrix::Identity(f_.block_dims[b], f_.block_dims[b]));
  }
  y_ = RVector::Zero(m_);
}

// Near the optimum the Schur solve cannot push A(X) = b much below eps/mu.
// Correct X by X A^T(w) X instead: the system tr(A_i X A_k X) depends on X
// alone, and the update stays in the range of X. Kept only if X stays
// positive definite and the residual shrinks.
bool Ipm::polish(const RVector& rp) {
  std::vector<std::vector<std::pair<Eigen::Index, const RMatrix*>>> by_block(nb_);
  for (Eigen::Index k = 0; k < m_; ++k)
    for (const auto& [blk, Ak] : f_.A[k]) by_block[blk].emplace_back(k, &Ak);
  RMatrix M = RMatrix::Zero(m_, m_);
  for (std::size_t b = 0; b < nb_; ++b) {
    const auto& list = by_block[b];
    std::vector<RMatrix> XA;
    XA.reserve(list.size());
    for (const auto& [k, Ak] : list) XA.push_back(X_[b] * (*Ak));
    for (std::size_t q = 0; q < list.size(); ++q)
      for (std::size_t p = 0; p <= q; ++p) {
        const double v = XA[p].cwiseProduct(XA[q].transpose()).sum();
        M(list[p].first, list[q].first) += v;
        if (p != q) M(list[q].first, list[p].first) += v;
      }
  }
  const RVector w = Eigen::LDLT<RMatrix>(M).solve(rp);
  if (!w.allFinite()) return false;
  const Blocks W = apply_At(w);
  Blocks X(nb_);
  for (std::size_t b = 0; b < nb_; ++b) {
    X[b] = sym(X_[b] + X_[b] * W[b] * X_[b]);
    if (Eigen::LLT<RMatrix>(X[b]).info() != Eigen::Success) return false;
  }
  if (!((f_.b - apply_A(X)).norm() < rp.norm())) return false;
  X_ = std::move(X);
  return true;
}

Solution Ipm::finish(Status status, int iterations) const {
  Solution sol;
  sol.status = status;
  sol.iterations = iterations;
  const RVector w = y_.cwiseQuotient(scale_);
  sol.x = f_.x0 + f_.null_basis * w;
  sol.objective = f_.sign * (user_.b.dot(w) + f_.offset);
  sol.dual_bound = f_.sign * (inner(f_.C, X_) + f_.offset);

  // Violation of the user's matrix constraints at x.
  const Blocks Aty = apply_At(y_);
  double worst = 0.0, cnorm = 0.0;
  for (std::size_t b = 0; b < nb_; ++b) {
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(sym(f_.C[b] - Aty[b]), Eigen::EigenvaluesOnly);
    worst = std::max(worst, -eig.eigenvalues()(0));
    cnorm = std::max(cnorm, f_.C[b].norm());
  }
  sol.primal_residual = worst / (1.0 + cnorm);
  sol.dual_residual = (f_.b - apply_A(X_)).norm() / (1.0 + f_.b.norm());
  return sol;
}

Solution Ipm::run() {
  if (!f_.equalities_consistent) {
    y_ = RVector::Zero(m_);
    X_.clear();
    for (int d : f_.block_dims) X_.push_back(RMatrix::Zero(d, d));
    return finish(Status::infeasible, 0);
  }
  if (nb_ == 0) {
    // Only equalities: unbounded unless the objective is constant on the affine set.
    y_ = RVector::Zero(m_);
    return finish(f_.b.norm() > 0.0 ? Status::unbounded : Status::optimal, 0);
  }
  initial_point();

  const double bnorm = f_.b.norm();
  const double cnorm = frob(f_.C);
  constexpr double kInfeasTol = 1e-8;
  int stalls = 0;
  Solution best;
  double best_merit = std::numeric_limits<double>::infinity();
  double best_certified_gap = std::numeric_limits<double>::infinity();

  for (int it = 0; it < opt_.max_iterations; ++it) {
    const Blocks Aty = apply_At(y_);
    Blocks Rd(nb_);
    for (std::size_t b = 0; b < nb_; ++b) Rd[b] = f_.C[b] - S_[b] - Aty[b];
    const double dobj = f_.b.dot(y_);
    const double dinf = frob(Rd) / (1.0 + cnorm);
    // Same normalization as Solution::relative_gap, in the user's objective.
    auto gap_of = [&](double p) { return std::abs(p - dobj) / std::max(1.0, std::abs(dobj + f_.offset)); };

    RVector AX = apply_A(X_);
    RVector rp = f_.b - AX;
    if (rp.norm() > opt_.tol * (1.0 + bnorm) && dinf <= opt_.tol && gap_of(inner(f_.C, X_)) <= 10.0 * opt_.tol) {
      for (int pass = 0; pass < 2 && polish(rp); ++pass) {
        AX = apply_A(X_);
        rp = f_.b - AX;
      }
    }

    const double pobj = inner(f_.C, X_);
    const double xs = inner(X_, S_);
    const double relgap = gap_of(pobj);
    const double pinf = rp.norm() / (1.0 + bnorm);
    const double merit = std::max({relgap, pinf, dinf});
    if (relgap <= opt_.tol && pinf <= opt_.tol && dinf <= opt_.tol) return finish(Status::optimal, it);
    // The contract for an optimal answer is residuals within tol and a gap
    // within 10 tol. Iterate for tol, but keep the best such point in case
    // the final steps lose accuracy.
    const bool certified = relgap <= 10.0 * opt_.tol && pinf <= opt_.tol && dinf <= opt_.tol;
    if (certified && (!best.optimal() || relgap < best_certified_gap)) {
      best_certified_gap = relgap;
      best = finish(Status::optimal, it);
    } else if (!best.optimal() && merit < best_merit) {
      best_merit = merit;
      best = finish(Status::numerical_failure, it);
    }

    // Certificates: a dual ray means the user's problem is unbounded; a primal
    // ray means its constraints cannot be met.
    if (dobj > 0.0) {
      double r = 0.0;
      for (std::size_t b = 0; b < nb_; ++b) r += (Aty[b] + S_[b]).squaredNorm();
      if (std::sqrt(r) / dobj < kInfeasTol) return finish(Status::unbounded, it);
    }
    if (pobj < 0.0 && AX.norm() / (-pobj) < kInfeasTol) return finish(Status::infeasible, it);

    // Schur complement M_ik = tr(A_i X A_k S^{-1}).
    Blocks Sinv(nb_);
    bool ok = true;
    for (std::size_t b = 0; b < nb_; ++b) {
      Eigen::LLT<RMatrix> llt(S_[b]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Sinv[b] = sym(llt.solve(RMatrix::Identity(S_[b].rows(), S_[b].cols())));
    }
    if (!ok) break;

    RMatrix M = RMatrix::Zero(m_, m_);
    {
      std::vector<std::vector<std::pair<Eigen::Index, const RMatrix*>>> by_block(nb_);
      for (Eigen::Index k = 0; k < m_; ++k)
        for (const auto& [blk, Ak] : f_.A[k]) by_block[blk].emplace_back(k, &Ak);
      for (std::size_t b = 0; b < nb_; ++b) {
        const auto& list = by_block[b];
        for (std::size_t q = 0; q < list.size(); ++q) {
          const RMatrix W = X_[b] * (*list[q].second) * Sinv[b];
          for (std::size_t p = 0; p <= q; ++p) {
            const double v = list[p].second->cwiseProduct(W.transpose()).sum();
            M(list[p].first, list[q].first) += v;
            if (p != q) M(list[q].first, list[p].first) += v;
          }
        }
      }
    }
    Eigen::LLT<RMatrix> schur(M);
    Eigen::LDLT<RMatrix> schur_ldlt;
    const bool use_llt = schur.info() == Eigen::Success;
    if (!use_llt) schur_ldlt.compute(M);
    auto solve_schur = [&](const RVector& rhs) -> RVector {
      return use_llt ? RVector(schur.solve(rhs)) : RVector(schur_ldlt.solve(rhs));
    };

    Blocks XRdSinv(nb_);
    for (std::size_t b = 0; b < nb_; ++b) XRdSinv[b] = X_[b] * Rd[b] * Sinv[b];
    const RVector base_rhs = f_.b + apply_A(XRdSinv);
    const RVector A_Sinv = apply_A(Sinv);
    const double mu = xs / n_;

    auto direction = [&](double sigma_mu, const Blocks* second_order, RVector& dy, Blocks& dX, Blocks& dS) {
      RVector rhs = base_rhs - sigma_mu * A_Sinv;
      Blocks corr;
      if (second_order) {
        corr.resize(nb_);
        for (std::size_t b = 0; b < nb_; ++b) corr[b] = (*second_order)[b] * Sinv[b];
        rhs += apply_A(corr);
      }
      auto build = [&](const RVector& y_step, Blocks& dXo, Blocks& dSo) {
        const Blocks Atdy = apply_At(y_step);
        dSo.resize(nb_);
        dXo.resize(nb_);
        for (std::size_t b = 0; b < nb_; ++b) {
          dSo[b] = Rd[b] - Atdy[b];
          RMatrix t = sigma_mu * Sinv[b] - X_[b] - sym(X_[b] * dSo[b] * Sinv[b]);
          if (second_order) t -= sym(corr[b]);
          dXo[b] = t;
        }
        return (rp - apply_A(dXo)).eval();
      };
      // A(dX) must reproduce the primal residual; the Schur matrix becomes
      // ill-conditioned near degenerate optima, so refine dy against the
      // exact operator. A correction is kept only if it shrinks the miss,
      // since near the end the solve itself can be the larger error.
      dy = solve_schur(rhs);
      RVector miss = build(dy, dX, dS);
      for (int pass = 0; pass < 2 && miss.norm() > 1e-15 * (1.0 + bnorm); ++pass) {
        const RVector dy_try = dy - solve_schur(miss);
        Blocks dX_try, dS_try;
        RVector miss_try = build(dy_try, dX_try, dS_try);
        if (!(miss_try.norm() < miss.norm())) break;
        dy = dy_try;
        dX = std::move(dX_try);
        dS = std::move(dS_try);
        miss = std::move(miss_try);
      }
    };

    // Predictor.
    RVector dy;
    Blocks dX, dS;
    direction(0.0, nullptr, dy, dX, dS);
    const double ap_aff = std::min(1.0, max_step(X_, dX));
    const double ad_aff = std::min(1.0, max_step(S_, dS));
    Blocks Xa(nb_), Sa(nb_);
    for (std::size_t b = 0; b < nb_; ++b) {
      Xa[b] = X_[b] + ap_aff * dX[b];
      Sa[b] = S_[b] + ad_aff * dS[b];
    }
    const double mu_aff = inner(Xa, Sa) / n_;
    const double ratio = std::max(0.0, mu_aff / mu);
    const double sigma = std::min(1.0, ratio * ratio * ratio);

    // Corrector.
    Blocks second(nb_);
    for (std::size_t b = 0; b < nb_; ++b) second[b] = dX[b] * dS[b];
    direction(sigma * mu, &second, dy, dX, dS);

    const double a_pmax = max_step(X_, dX);
    const double a_dmax = max_step(S_, dS);
    const double gamma = 0.9 + 0.09 * std::min(ap_aff, ad_aff);
    const double ap = std::min(1.0, gamma * a_pmax);
    const double ad = std::min(1.0, gamma * a_dmax);
    if (!(ap > 0.0) || !(ad > 0.0) || !std::isfinite(ap) || !std::isfinite(ad)) break;

    for (std::size_t b = 0; b < nb_; ++b) {
      X_[b] = sym(X_[b] + ap * dX[b]);
      S_[b] = sym(S_[b] + ad * dS[b]);
    }
    y_ += ad * dy;

    if (std::max(ap, ad) < 1e-10) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
  }
  return best;
}

}  // namespace

Solution InteriorPointBackend::solve(const Problem& problem, const Options& options) const {
  const StandardForm form = compile(problem);
  return Ipm(form, options).run();
}

const Backend& default_backend() {
  static const InteriorPointBackend backend;
  return backend;
}

}  // namespace irscrlb::sdp

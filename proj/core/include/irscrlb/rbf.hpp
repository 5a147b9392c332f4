#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "irscrlb/sdp.hpp"
#include "irscrlb/sensing.hpp"

namespace irscrlb {

/// Raised when v^H R1 v or v^H R2 v vanishes, i.e. no energy reaches the AP
/// through the reflector.
class DegenerateReflector : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Reflect-side objective, proportional to 1 / CRLB:
///   v^H R2 v (v^H D R1 D v - |v^H D R1 v|^2 / v^H R1 v)
///     + v^H R1 v (v^H D R2 D v - |v^H D R2 v|^2 / v^H R2 v).
double reflect_objective(const CVector& v, const ReflectMatrices& rm);

/// Lifted reflector V ~ v v^H with the epigraph scalars of the two fractional
/// terms, t1 >= |tr(D R1 V)|^2 / tr(R1 V) and t2 likewise with R2.
struct LiftedReflector {
  CMatrix V;
  double t1 = 0.0;
  double t2 = 0.0;
};

/// V = v v^H with t1, t2 at their lower bounds.
LiftedReflector tight_lift(const CVector& v, const ReflectMatrices& rm);

struct F1F2 {
  double f1 = 0.0;  // convex part
  double f2 = 0.0;  // concave part
};

F1F2 split_f1_f2(const LiftedReflector& x, const ReflectMatrices& rm);

/// tr(R2 V)(tr(D R1 D V) - t1) + tr(R1 V)(tr(D R2 D V) - t2), which equals f1 + f2.
double lifted_objective(const LiftedReflector& x, const ReflectMatrices& rm);

/// First-order expansion of f1 at `at`, evaluated at `x`. A global lower bound on f1.
double f1_tangent(const LiftedReflector& x, const LiftedReflector& at, const ReflectMatrices& rm);

struct ScaOptions {
  int max_iterations = 50;
  double rel_tol = 1e-4;
  sdp::Options solver;
};

struct ScaTrace {
  std::vector<double> objective;  // lifted objective at the start and after each accepted step
  std::vector<double> gaps;       // relative duality gap of every subproblem
  int iterations = 0;
  bool converged = false;
  bool failed = false;  // a subproblem did not solve; the best iterate is returned
};

struct ScaResult {
  LiftedReflector x;
  ScaTrace trace;
};

/// Successive convex approximation of the relaxed reflect problem: f1 is
/// replaced by its tangent at the current iterate and f2 is kept exactly, subject to
/// diag(V) = 1, V >= 0 and the Schur-complement forms of the t1, t2 bounds.
/// Only improving iterates are accepted.
ScaResult sca_solve(const ReflectMatrices& rm, const LiftedReflector& init, const ScaOptions& options = {},
                    const sdp::Backend& backend = sdp::default_backend());

/// Draws `num_samples` z ~ CN(0, V), projects each to exp(j arg z), adds the
/// dominant-eigenvector candidate and returns the highest-scoring one.
/// Candidates whose score throws DegenerateReflector or is not finite are
/// skipped; throws DegenerateReflector when every candidate is.
CVector gaussian_randomize(const CMatrix& V, const std::function<double(const CVector&)>& score, int num_samples,
                           Rng& rng);
CVector gaussian_randomize(const CMatrix& V, const ReflectMatrices& rm, int num_samples, Rng& rng);

/// max tr(Q V) s.t. diag(V) = 1, V >= 0.
CMatrix unit_diagonal_sdr(const CMatrix& Q, const sdp::Backend& backend = sdp::default_backend(),
                          const sdp::Options& options = {});

struct ReflectOptions {
  ScaOptions sca;
  int randomization_samples = 1000;
};

struct ReflectResult {
  CVector v;
  double objective = 0.0;  // reflect_objective of v for the normalized R1, R2
  bool kept_incumbent = false;
  ScaResult sca;
};

/// One full reflect step for fixed Rx: SCA from the lifted incumbent,
/// randomization, and fallback to the incumbent when nothing beats it.
ReflectResult optimize_reflect(const CMatrix& G, const CMatrix& Rx, double theta, double spacing_ratio,
                               const CVector& incumbent, Rng& rng, const ReflectOptions& options = {},
                               const sdp::Backend& backend = sdp::default_backend());

}  // namespace irscrlb

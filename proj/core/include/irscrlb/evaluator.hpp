#pragma once

#include <cstdint>

#include "irscrlb/optimizer.hpp"
#include "irscrlb/scenario.hpp"

namespace irscrlb {

struct MleOptions {
  double grid_step = 1e-3;  // rad
  int refine_iters = 40;    // golden-section steps on the best grid cell
};

struct MleResult {
  double theta = 0.0;
  Complex alpha{0.0, 0.0};
  double objective = 0.0;  // |u^H y|^2 / |u|^2 at theta
};

/// Concentrated log-likelihood of the deterministic model Y = alpha B(theta) X + N,
/// i.e. |u(theta)^H y|^2 / |u(theta)|^2 with u = vec(B(theta) X), or 0 where u = 0.
double mle_objective(const CMatrix& Y, const CMatrix& X, const CMatrix& G, const CVector& v, double theta,
                     double spacing_ratio);

/// Grid search over [-pi/2, pi/2] followed by golden-section refinement.
/// Throws std::domain_error when u(theta) vanishes on the whole grid.
MleResult mle_estimate(const CMatrix& Y, const CMatrix& X, const CMatrix& G, const CVector& v, double spacing_ratio,
                       const MleOptions& options = {});

struct MsePoint {
  double mse = 0.0;         // rad^2
  double mse_stderr = 0.0;
  double mean_theta = 0.0;  // mean estimate, for bias checks
  double theta_stderr = 0.0;
  int trials = 0;
};

/// Monte Carlo MSE of the MLE for a fixed design and channel. Trial k draws
/// its noise from derive_rng(seed, {k}), so the result does not depend on
/// `threads`. Requires num_trials >= 50.
MsePoint monte_carlo_mse(const Scenario& scenario, const ChannelRealization& channel, const JointDesign& design,
                         int num_trials, std::uint64_t seed, int threads = 1, const MleOptions& options = {});

}  // namespace irscrlb

#include "irscrlb/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

namespace irscrlb {

namespace {

// With P = Y X^H and Q = X X^H:
//   u^H y = b^H P conj(b),  |u|^2 = |b|^2 b^T Q conj(b).
struct Concentrated {
  const CMatrix& G;
  const CVector& v;
  double ratio;
  CMatrix P;
  CMatrix Q;

  // Returns {objective, u^H y, |u|^2}.
  std::tuple<double, Complex, double> at(double theta) const {
    const CVector b = G.transpose() * steering_vector(theta, static_cast<int>(v.size()), ratio).cwiseProduct(v);
    const CVector bc = b.conjugate();
    const Complex num = b.dot(P * bc);
    const double den = b.squaredNorm() * (b.transpose() * Q * bc)(0).real();
    if (!(den > 0.0)) return {0.0, Complex(0.0), 0.0};
    return {std::norm(num) / den, num, den};
  }
};

}  // namespace

double mle_objective(const CMatrix& Y, const CMatrix& X, const CMatrix& G, const CVector& v, double theta,
                     double spacing_ratio) {
  const Concentrated c{G, v, spacing_ratio, Y * X.adjoint(), X * X.adjoint()};
  return std::get<0>(c.at(theta));
}

MleResult mle_estimate(const CMatrix& Y, const CMatrix& X, const CMatrix& G, const CVector& v, double spacing_ratio,
                       const MleOptions& options) {
  if (!(options.grid_step > 0.0)) throw std::invalid_argument("mle_estimate: grid_step must be positive");
  const Concentrated c{G, v, spacing_ratio, Y * X.adjoint(), X * X.adjoint()};
  const double lo = -kPi / 2.0;
  const double hi = kPi / 2.0;
  const int cells = static_cast<int>(std::ceil((hi - lo) / options.grid_step));
  auto grid = [&](int k) { return std::min(hi, lo + k * options.grid_step); };

  int best_k = -1;
  double best = -1.0;
  bool any_signal = false;
  for (int k = 0; k <= cells; ++k) {
    const auto [f, num, den] = c.at(grid(k));
    any_signal = any_signal || den > 0.0;
    if (f > best) {
      best = f;
      best_k = k;
    }
  }
  if (!any_signal) throw std::domain_error("mle_estimate: B(theta) X vanishes on the whole grid");

  // Golden section on the two cells around the best grid point.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = grid(std::max(0, best_k - 1));
  double b = grid(std::min(cells, best_k + 1));
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = std::get<0>(c.at(x1));
  double f2 = std::get<0>(c.at(x2));
  for (int i = 0; i < options.refine_iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = std::get<0>(c.at(x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = std::get<0>(c.at(x1));
    }
  }
  double theta = grid(best_k);
  for (double cand : {x1, x2, 0.5 * (a + b)}) {
    const double f = std::get<0>(c.at(cand));
    if (f > best) {
      best = f;
      theta = cand;
    }
  }
  const auto [f, num, den] = c.at(theta);
  return {theta, den > 0.0 ? num / den : Complex(0.0), f};
}

MsePoint monte_carlo_mse(const Scenario& scenario, const ChannelRealization& channel, const JointDesign& design,
                         int num_trials, std::uint64_t seed, int threads, const MleOptions& options) {
  if (num_trials < 50) throw std::invalid_argument("monte_carlo_mse: at least 50 trials are required");
  const CMatrix X = synthesize_waveform(design.Rx, scenario.dwell_slots);
  const double ratio = scenario.element_spacing_ratio;
  std::vector<double> estimates(num_trials);

  const int n_threads = std::clamp(threads, 1, num_trials);
  std::vector<std::exception_ptr> errors(n_threads);
  auto work = [&](int first) {
    try {
      for (int k = first; k < num_trials; k += n_threads) {
        Rng rng = derive_rng(seed, {static_cast<std::uint64_t>(k)});
        const CMatrix Y = simulate_echo(channel, design.v, X, scenario.noise_power_w, ratio, rng);
        estimates[k] = mle_estimate(Y, X, channel.G, design.v, ratio, options).theta;
      }
    } catch (...) {
      errors[first] = std::current_exception();
    }
  };
  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work, t);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  MsePoint out;
  out.trials = num_trials;
  double se = 0.0, se2 = 0.0, th = 0.0, th2 = 0.0;
  for (double e : estimates) {
    const double err = e - channel.theta;
    se += err * err;
    se2 += err * err * err * err;
    th += e;
    th2 += e * e;
  }
  const double n = num_trials;
  out.mse = se / n;
  out.mse_stderr = std::sqrt(std::max(0.0, se2 / n - out.mse * out.mse) / (n - 1.0));
  out.mean_theta = th / n;
  out.theta_stderr = std::sqrt(std::max(0.0, th2 / n - out.mean_theta * out.mean_theta) / (n - 1.0));
  return out;
}

}  // namespace irscrlb

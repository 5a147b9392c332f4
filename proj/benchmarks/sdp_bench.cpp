#include <benchmark/benchmark.h>

#include "irscrlb/rbf.hpp"
#include "irscrlb/scenario.hpp"
#include "irscrlb/sdp.hpp"
#include "irscrlb/txbf.hpp"

namespace irscrlb {
namespace {

CMatrix random_hermitian(int n, Rng& rng) {
  CMatrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = standard_complex_normal(rng);
  return 0.5 * (A + A.adjoint());
}

// max tr(CZ) s.t. tr(Z) = 1, Z >= 0.
void BM_EigenvalueSdp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng = derive_rng(11, {static_cast<std::uint64_t>(n)});
  const CMatrix C = random_hermitian(n, rng);
  sdp::Problem p;
  auto Z = p.add_hermitian(n);
  p.maximize(p.trace_product(C, Z).real());
  p.add_psd(Z);
  p.add_equality(p.trace(Z) - 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(sdp::default_backend().solve(p, sdp::Options{}));
}
BENCHMARK(BM_EigenvalueSdp)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_UnitDiagonalSdr(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng = derive_rng(12, {static_cast<std::uint64_t>(n)});
  const CMatrix Q = random_hermitian(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(unit_diagonal_sdr(Q));
}
BENCHMARK(BM_UnitDiagonalSdr)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TransmitSdp(benchmark::State& state) {
  Scenario s = reference_scenario();
  s.num_irs_elements = static_cast<int>(state.range(0));
  Rng rng = derive_rng(13, {});
  const auto ch = generate_channel(s, rng);
  const CVector v = CVector::Ones(s.num_irs_elements);
  for (auto _ : state)
    benchmark::DoNotOptimize(optimize_transmit(ch.G, v, ch.theta, s.power_budget_w, s.element_spacing_ratio));
}
BENCHMARK(BM_TransmitSdp)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace irscrlb

#include <benchmark/benchmark.h>

#include "ovf/refinement.hpp"
#include "ovf/stationarity.hpp"
#include "ovf/synthesis.hpp"

namespace {

ovf::VectorFieldTable instance(std::size_t atoms) {
  return ovf::assemble(ovf::make_spec(atoms, "mixed", 1, true, true));
}

void BM_VerifyOrthogonality(benchmark::State& state) {
  const auto F = instance(static_cast<std::size_t>(state.range(0)));
  ovf::VerifyOptions vo;
  vo.samples = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(verify_orthogonality(F, vo).pass());
}
BENCHMARK(BM_VerifyOrthogonality)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_VerifyProp1(benchmark::State& state) {
  const auto F = instance(static_cast<std::size_t>(state.range(0)));
  ovf::VerifyOptions vo;
  for (auto _ : state) benchmark::DoNotOptimize(verify_prop1(F, vo).pass());
}
BENCHMARK(BM_VerifyProp1)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Stationarize(benchmark::State& state) {
  const auto F = instance(static_cast<std::size_t>(state.range(0)));
  ovf::StationarizeOptions so;
  so.verify_input = false;
  for (auto _ : state) benchmark::DoNotOptimize(stationarize(F, so).report.pass());
}
BENCHMARK(BM_Stationarize)->Arg(1)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_RoundTrip(benchmark::State& state) {
  const auto F = instance(static_cast<std::size_t>(state.range(0)));
  ovf::SynthesisOptions no_check;
  no_check.check = false;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(reductions(F), no_check).hilbert_dim());
}
BENCHMARK(BM_RoundTrip)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

ovf::ScalarFieldProfile tent() {
  using ovf::PiecewisePolynomial;
  ovf::ScalarFieldProfile p;
  p.rho11 = PiecewisePolynomial({0.0, 0.5, 1.0}, {{0.2, 0.8}, {0.8, -0.4}});
  p.rho22 = PiecewisePolynomial({0.0, 0.5, 1.0}, {{0.8, -0.8}, {0.2, 0.4}});
  p.r21 = PiecewisePolynomial::linear(0.3, 0.2);
  p.r12 = PiecewisePolynomial::linear(0.7, -0.2);
  p.phi12 = {PiecewisePolynomial::constant(0.05), {0.7}};
  return p;
}

void BM_BuildPartition(benchmark::State& state) {
  const auto p = tent();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_partition(p, n).cells.size());
}
BENCHMARK(BM_BuildPartition)->RangeMultiplier(4)->Range(4, 256)->Unit(benchmark::kMicrosecond);

void BM_ConvergenceReport(benchmark::State& state) {
  const auto p = tent();
  for (auto _ : state) {
    benchmark::DoNotOptimize(convergence_report(p, {2, 4, 8, 16, 32, 64}).monotone);
  }
}
BENCHMARK(BM_ConvergenceReport)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>

#include "robustmult/adversary.hpp"
#include "robustmult/lti.hpp"
#include "robustmult/matcore.hpp"
#include "robustmult/phase.hpp"
#include "robustmult/separation.hpp"
#include "robustmult/synthesis.hpp"

namespace rm = robustmult;

namespace {

rm::ComplexMatrix random_complex(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  rm::ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rm::Complex(nd(rng), nd(rng));
  return m;
}

// T* D T with unit-modulus D: sectorial with phases in a narrow sector.
rm::ComplexMatrix sectorial(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  rm::ComplexVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = std::polar(1.0, u(rng));
  const rm::ComplexMatrix t =
      random_complex(n, rng) + 3.0 * rm::ComplexMatrix::Identity(n, n);
  return t.adjoint() * d.asDiagonal() * t;
}

rm::StateSpace stable_system(int states, int io, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  auto real = [&](int r, int c) {
    rm::RealMatrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = nd(rng);
    return m;
  };
  rm::RealMatrix a = real(states, states);
  const double shift =
      Eigen::EigenSolver<rm::RealMatrix>(a, false).eigenvalues().real().maxCoeff();
  a -= (shift + 0.5) * rm::RealMatrix::Identity(states, states);
  return rm::StateSpace::make(a, real(states, io), real(io, states),
                              rm::RealMatrix::Zero(io, io));
}

void BM_NumericalRange(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const rm::ComplexMatrix a = random_complex(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(rm::numerical_range_boundary(a, 64));
}
BENCHMARK(BM_NumericalRange)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_SteinSplit(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const rm::ComplexMatrix f = random_complex(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(rm::stein_split(f));
}
BENCHMARK(BM_SteinSplit)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_ClassifyAndPhases(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const rm::ComplexMatrix a = sectorial(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(rm::classify_and_phases(a));
}
BENCHMARK(BM_ClassifyAndPhases)->Arg(2)->Arg(4)->Arg(8);

void BM_SynthPhasalScaling(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const rm::ComplexMatrix a = random_complex(state.range(0), rng);
  const rm::ComplexMatrix b = random_complex(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(rm::synth_phasal_scaling(a, b));
}
BENCHMARK(BM_SynthPhasalScaling)->Arg(2)->Arg(4)->Arg(8);

void BM_SynthPhasalCongruence(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const rm::ComplexMatrix a = sectorial(state.range(0), rng);
  const rm::ComplexMatrix b = sectorial(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(rm::synth_phasal_congruence(a, b));
}
BENCHMARK(BM_SynthPhasalCongruence)->Arg(2)->Arg(4);

void BM_SynthGainRotation(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const rm::ComplexMatrix a = random_complex(state.range(0), rng);
  const rm::ComplexMatrix b = random_complex(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(rm::synth_gain_rotation(a, b));
}
BENCHMARK(BM_SynthGainRotation)->Arg(2)->Arg(4)->Arg(8);

void BM_FalsifyUnitary(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const rm::ComplexMatrix a = random_complex(3, rng);
  const rm::ComplexMatrix b = random_complex(3, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rm::falsify_random(
        a, b, rm::UncertaintyClass::Unitary, static_cast<int>(state.range(0)), 11));
  }
}
BENCHMARK(BM_FalsifyUnitary)->Arg(100)->Arg(1000);

void BM_NecessitySweep(benchmark::State& state) {
  std::mt19937_64 rng(8);
  const rm::StateSpace g = stable_system(static_cast<int>(state.range(0)), 2, rng);
  const rm::StateSpace k =
      rm::StateSpace::gain(0.1 * rm::RealMatrix::Identity(2, 2));
  const auto grid = rm::FrequencyGrid::log_spaced();
  for (auto _ : state) benchmark::DoNotOptimize(rm::necessity_multiplier(g, k, grid));
}
BENCHMARK(BM_NecessitySweep)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();

// Microbenchmarks for the hot paths: coefficient assembly, forward solves,
// boundary sweeps, and mesh generation.

#include <benchmark/benchmark.h>

#include <cmath>

#include "peeropt/equidist.hpp"
#include "peeropt/heat.hpp"
#include "peeropt/sweeps.hpp"
#include "peeropt/triplet.hpp"

namespace {

using namespace peeropt;

void BM_AssembleB(benchmark::State& state) {
  const PeerTriplet& t = builtin_triplet(
      state.range(0) == 0 ? "AP4o33vgi" : "AP4o33vsi");
  double sigma = 1.0;
  for (auto _ : state) {
    sigma = sigma < 2.0 ? sigma + 1e-6 : 1.0;  // defeat caching
    benchmark::DoNotOptimize(assemble_B(t, sigma));
  }
}
BENCHMARK(BM_AssembleB)->Arg(0)->Arg(1);

void BM_HeatForward(benchmark::State& state) {
  const PeerTriplet& t = builtin_triplet("AP4o33vgi");
  HeatProblem prob(static_cast<int>(state.range(0)));
  Grid g = uniform_grid(0.0, 1.0, 32);
  ControlTrajectory U = ControlTrajectory::constant(VecX::Zero(1), 32);
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_solve(prob, t, g, U));
}
BENCHMARK(BM_HeatForward)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_HeatAdjoint(benchmark::State& state) {
  const PeerTriplet& t = builtin_triplet("AP4o33vgi");
  HeatProblem prob(static_cast<int>(state.range(0)));
  Grid g = uniform_grid(0.0, 1.0, 32);
  ControlTrajectory U = ControlTrajectory::constant(VecX::Zero(1), 32);
  Trajectory Y = forward_solve(prob, t, g, U);
  for (auto _ : state)
    benchmark::DoNotOptimize(adjoint_solve(prob, t, g, U, Y));
}
BENCHMARK(BM_HeatAdjoint)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_BoundarySweeps(benchmark::State& state) {
  // start-block cost in isolation: a two-slab grid is dominated by it
  const PeerTriplet& t = builtin_triplet("AP4o33vgi");
  HeatProblem prob(250);
  Grid g = uniform_grid(0.0, 1.0, 2);
  ControlTrajectory U = ControlTrajectory::constant(VecX::Zero(1), 2);
  for (auto _ : state) {
    SweepStats stats;
    benchmark::DoNotOptimize(
        forward_solve(prob, t, g, U, SolverOptions{}, &stats));
  }
}
BENCHMARK(BM_BoundarySweeps)->Unit(benchmark::kMillisecond);

void BM_Equidistribute(benchmark::State& state) {
  MeshDensity psi = [](double t) { return std::exp(-t) + 0.2; };
  int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(equidistribute(psi, 0.0, 1.0, n));
}
BENCHMARK(BM_Equidistribute)->Arg(16)->Arg(128);

}  // namespace

BENCHMARK_MAIN();

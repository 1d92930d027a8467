#include <benchmark/benchmark.h>

#include "edgemarket/eg_solver.hpp"
#include "edgemarket/experiment.hpp"
#include "edgemarket/mechanisms.hpp"
#include "edgemarket/oracle.hpp"
#include "edgemarket/scenario.hpp"

namespace {

using namespace edgemarket;

// Default deployment with `providers` providers, fixed seed.
MarketInstance deployment_instance(std::size_t providers) {
  DeploymentTemplate d;
  d.provider_count = providers;
  return generate_instance(d, 2024);
}

void BM_EquilibriumSolve(benchmark::State& state) {
  const auto in = deployment_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_eg(in));
}
BENCHMARK(BM_EquilibriumSolve)->Arg(5)->Arg(15)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_SocialOptimum(benchmark::State& state) {
  const auto in = deployment_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_mechanism(in, Mechanism::so));
}
BENCHMARK(BM_SocialOptimum)->Arg(15)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_ProportionalSharing(benchmark::State& state) {
  const auto in = deployment_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(allocate_proportional_sharing(in));
}
BENCHMARK(BM_ProportionalSharing)->Arg(15)->Arg(60);

void BM_Metrics(benchmark::State& state) {
  const auto in = deployment_instance(15);
  std::vector<MechanismResult> results;
  for (Mechanism m : {Mechanism::me, Mechanism::so, Mechanism::wso, Mechanism::ps}) {
    results.push_back(run_mechanism(in, m));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics("bench", in, results));
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
  MarketInstance in;
  in.mec_capacity = Matrix(2, 2);
  in.mec_capacity(0, 0) = 32.0;
  in.mec_capacity(0, 1) = 128.0;
  in.mec_capacity(1, 0) = 16.0;
  in.mec_capacity(1, 1) = 256.0;
  in.ran_capacity = {40.0, 20.0};
  in.mec_demand = Matrix(3, 2);
  const double demands[3][2] = {{4.0, 8.0}, {1.0, 32.0}, {5.0, 40.0}};
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t r = 0; r < 2; ++r) in.mec_demand(s, r) = demands[s][r];
  }
  in.ran_demand = Matrix(3, 2, 3.0);
  in.budgets = {1.0, 1.0, 2.0};
  const double resolution = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_nsw_oracle(in, resolution));
}
BENCHMARK(BM_Oracle)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

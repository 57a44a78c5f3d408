#include <benchmark/benchmark.h>

#include "lasertune/core_physics.hpp"
#include "lasertune/tls_sim.hpp"
#include "lasertune/tuner.hpp"
#include "lasertune/wafer_ops.hpp"

using namespace lasertune;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_RunBatch(benchmark::State& state) {
  const WaferLayout wafer = make_grid_wafer("bench", 50, 60, 1600.0, 7781.0, 0.02, 1);
  const BatchConfig config;
  for (auto _ : state) {
    auto report = run_batch(wafer, LasingRecipe{}, config, 7, mode(state));
    benchmark::DoNotOptimize(report.shift_mean);
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_RunBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimulateMap(benchmark::State& state) {
  QubitNoiseModel model;
  model.readout_noise_sigma = 0.02;
  model.defects.push_back({7.81e6, 76e3, 1e6, StaticDynamics{}});
  model.defects.push_back({-12e6, 50e3, 1e6, TelegraphicDynamics{-12e6, -15e6, 1.0 / 3600.0}});
  const MapGrid grid = MapGrid::uniform(-33e6, 33e6, 0.25e6, 160.0, 600.0, 40e-6);
  for (auto _ : state) {
    auto map = simulate_map(model, grid, 3, mode(state));
    benchmark::DoNotOptimize(map.population.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_SimulateMap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TunePopulation(benchmark::State& state) {
  const JunctionPhysics phys;
  const double f0 = phys.qubit_frequency(Ohms(7781.0)).value();
  std::vector<TuneJob> jobs;
  for (int i = 0; i < 1000; ++i) jobs.push_back({"J" + std::to_string(i), 7781.0, f0 - 94e6});
  const DoseModel dose = DoseModel::defaults();
  for (auto _ : state) {
    auto traces = tune_population(jobs, TunePolicy{}, dose, 11, mode(state));
    benchmark::DoNotOptimize(traces.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_TunePopulation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

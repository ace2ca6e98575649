// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "fbmavg/ensemble.hpp"
#include "fbmavg/experiments.hpp"

using namespace fbmavg;

namespace {

const FbmGenerator& generator() {
    static const FbmGenerator gen(GenerationMethod::circulant, TimeGrid(1.0, 1024), HurstParameter(0.7));
    return gen;
}

ExperimentConfig paired_config(int threads) {
    ExperimentConfig cfg = example2_preset();
    cfg.replicates = 500;
    cfg.keep_trajectories = 0;
    cfg.threads = threads;
    return cfg;
}

void BM_EnsembleSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(generate_ensemble_serial(generator(), 256, 1));
    state.SetItemsProcessed(state.iterations() * 256);
}

void BM_EnsembleParallel(benchmark::State& state) {
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(generate_ensemble(generator(), 256, 1, threads));
    state.SetItemsProcessed(state.iterations() * 256);
}

void BM_PairedSerial(benchmark::State& state) {
    const ExperimentConfig cfg = paired_config(1);
    for (auto _ : state) benchmark::DoNotOptimize(run_paired_serial(cfg, 0.002));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.replicates));
}

void BM_PairedParallel(benchmark::State& state) {
    const ExperimentConfig cfg = paired_config(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_paired(cfg, 0.002));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.replicates));
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PairedSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairedParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

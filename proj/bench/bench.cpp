#include <benchmark/benchmark.h>

#include <map>
#include <numeric>

#include "rca/psi_pc.h"
#include "rca/rcd.h"
#include "rca/simulator.h"

using namespace rca;

namespace {

// One simulated localization input per topology size, built once.
const PreparedData &prepared(int services) {
    static std::map<int, PreparedData> cache;
    auto it = cache.find(services);
    if (it != cache.end()) return it->second;
    auto g = generate_topology(static_cast<std::size_t>(services), 3, 1);
    FaultScenario sc;
    sc.kind = FaultKind::CpuHog;
    sc.target_node = "svc2-ctr";
    sc.target_layer = Layer::Container;
    sc.magnitude = 0.4;
    sc.seed = 11;
    auto sim = simulate(g, sc);
    return cache.emplace(services, prepare(sim.normal, sim.anomalous, kDefaultBins)).first->second;
}

TimeSeriesDataset raw(int services) {
    auto g = generate_topology(static_cast<std::size_t>(services), 3, 1);
    FaultScenario sc;
    sc.target_node = "svc1-ctr";
    sc.seed = 11;
    return simulate(g, sc).normal;
}

std::vector<std::vector<std::size_t>> level_subsets(const PreparedData &d) {
    std::vector<std::size_t> all(d.metrics.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return random_partition_indices(all, 4, 7);
}

void psi_pc_batch_serial_bm(benchmark::State &state) {
    const auto &d = prepared(static_cast<int>(state.range(0)));
    auto subsets = level_subsets(d);
    PsiPcOptions o;
    for (auto _ : state) benchmark::DoNotOptimize(psi_pc_batch_serial(d.discrete, subsets, d.fnode_col, o));
    state.counters["metrics"] = static_cast<double>(d.metrics.size());
}

void psi_pc_batch_parallel_bm(benchmark::State &state) {
    const auto &d = prepared(static_cast<int>(state.range(0)));
    auto subsets = level_subsets(d);
    PsiPcOptions o;
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(psi_pc_batch_parallel(d.discrete, subsets, d.fnode_col, o, workers));
    state.counters["metrics"] = static_cast<double>(d.metrics.size());
}

void discretize_serial_bm(benchmark::State &state) {
    auto data = raw(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(discretize_serial(data, kDefaultBins));
}

void discretize_parallel_bm(benchmark::State &state) {
    auto data = raw(static_cast<int>(state.range(0)));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(discretize_parallel(data, kDefaultBins, workers));
}

} // namespace

BENCHMARK(psi_pc_batch_serial_bm)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(psi_pc_batch_parallel_bm)->ArgsProduct({{5, 20}, {2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(discretize_serial_bm)->Arg(5)->Arg(20)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(discretize_parallel_bm)->ArgsProduct({{5, 20}, {2, 4}})->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();

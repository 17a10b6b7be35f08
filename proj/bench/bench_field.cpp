// Serial reference against the OpenMP evaluator on a smooth configuration.
// Thread count follows SPINORFORGE_THREADS.
#include "spinorforge/field_theory.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace spinorforge;

namespace {

const FieldConfig& config(int n) {
    static std::map<int, FieldConfig> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        Grid4 g;
        g.shape = {n, n, n, n};
        it = cache.emplace(n, smooth_random_config(g, 2024)).first;
    }
    return it->second;
}

void BM_EvaluateSerial(benchmark::State& st) {
    const FieldConfig& cfg = config(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(evaluate_field(cfg, ExecPolicy::Serial).action);
    st.SetItemsProcessed(st.iterations() * static_cast<long>(cfg.grid.size()));
}

void BM_EvaluateOpenMP(benchmark::State& st) {
    const FieldConfig& cfg = config(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(evaluate_field(cfg, ExecPolicy::OpenMP).action);
    st.SetItemsProcessed(st.iterations() * static_cast<long>(cfg.grid.size()));
    st.counters["threads"] = configured_threads();
}

void BM_OracleSite(benchmark::State& st) {
    const FieldConfig& cfg = config(8);
    std::size_t s = cfg.grid.index({3, 4, 3, 4});
    auto comps = components_of(FieldKind::A);
    for (auto _ : st) benchmark::DoNotOptimize(variational_oracle(cfg, comps, s));
}

}  // namespace

BENCHMARK(BM_EvaluateSerial)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateOpenMP)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleSite)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

// Serial reference against the OpenMP kernels on the bench workload.

#include <map>

#include <benchmark/benchmark.h>

#include "dagrid/accumulate.hpp"
#include "dagrid/parallel.hpp"
#include "dagrid/serial.hpp"
#include "dagrid/suites.hpp"

namespace {

using namespace dagrid;

const BenchCase& workload(std::size_t n) {
    static std::map<std::size_t, BenchCase> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, bench_case(n, 1)).first;
    return it->second;
}

void BM_AccumulateSerial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto& bc = workload(n);
    for (auto _ : st) benchmark::DoNotOptimize(serial::accumulate(bc.u, bc.grids, KernelKind::Bilinear, {n, n}));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n * bc.grids.size()));
}

void BM_AccumulateParallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto& bc = workload(n);
    set_workers(static_cast<int>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(accumulate(bc.u, bc.grids, KernelKind::Bilinear, {n, n}));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n * bc.grids.size()));
}

void BM_SliceSerial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto& bc = workload(n);
    for (auto _ : st) benchmark::DoNotOptimize(serial::slice(bc.v, bc.grids, KernelKind::Bilinear, {n, n}));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n * bc.grids.size()));
}

void BM_SliceParallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto& bc = workload(n);
    set_workers(static_cast<int>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(slice(bc.v, bc.grids, KernelKind::Bilinear, {n, n}));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n * bc.grids.size()));
}

}  // namespace

BENCHMARK(BM_AccumulateSerial)->Arg(64)->Arg(224)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AccumulateParallel)
    ->ArgsProduct({{64, 224, 512}, {1, 2, 4}})
    ->Unit(benchmark::kMicrosecond)
    ->UseRealTime();
BENCHMARK(BM_SliceSerial)->Arg(64)->Arg(224)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SliceParallel)->ArgsProduct({{64, 224, 512}, {1, 2, 4}})->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();

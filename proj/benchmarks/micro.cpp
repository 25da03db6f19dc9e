// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <benchmark/benchmark.h>

#include "tensim/bench.hpp"
#include "tensim/exec.hpp"
#include "tensim/jacobi.hpp"
#include "tensim/noc.hpp"
#include "tensim/numerics.hpp"

using namespace tensim;

namespace {

void BM_Bf16Add(benchmark::State& s) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(-4, 4);
    std::vector<BF16> v(1024);
    for (auto& x : v) x = fp32_to_bf16(u(rng));
    BF16 acc{};
    for (auto _ : s) {
        for (BF16 x : v) acc = bf16_add(acc, x);
        benchmark::DoNotOptimize(acc);
    }
    s.SetItemsProcessed(s.iterations() * v.size());
}
BENCHMARK(BM_Bf16Add);

void BM_StencilTile(benchmark::State& s) {
    Tile32 a, b;
    for (int i = 0; i < kTileElems; ++i) {
        a.elems[i] = fp32_to_bf16(0.001f * i);
        b.elems[i] = fp32_to_bf16(1.0f - 0.001f * i);
    }
    const Tile32 q = scalar_tile(fp32_to_bf16(0.25f));
    for (auto _ : s) {
        Tile32 t = tensim::mul_tiles(add_tiles(add_tiles(add_tiles(a, b), a), b), q);
        benchmark::DoNotOptimize(t);
    }
    s.SetItemsProcessed(s.iterations() * kTileElems);
}
BENCHMARK(BM_StencilTile);

void BM_SchedulerEvents(benchmark::State& s) {
    const int n = static_cast<int>(s.range(0));
    KernelProgram prog;
    prog.reader = [n](KernelContext& c) -> Task<> {
        for (int i = 0; i < n; ++i) co_await Delay{&c.scheduler(), 1000};
    };
    prog.writer = prog.reader;
    CostParams p;
    for (auto _ : s) {
        DramModel dram;
        std::vector<CoreLaunch> cores{{CoreGrid{}.workers()[0], {}}};
        benchmark::DoNotOptimize(launch(dram, p, prog, cores).virtual_seconds);
    }
    s.SetItemsProcessed(s.iterations() * 2 * n);
}
BENCHMARK(BM_SchedulerEvents)->Arg(1 << 14);

void BM_NocSchedule(benchmark::State& s) {
    CostParams p;
    for (auto _ : s) {
        DramModel dram;
        DramBuffer b = dram.allocate(Interleaved{2048}, 1 << 20);
        NocEngine noc(dram, p, 4);
        Picos t[4] = {};
        for (std::uint64_t off = 0; off < b.length; off += 2048) {
            const int core = static_cast<int>((off / 2048) % 4);
            t[core] = noc.read(t[core], core, get_noc_addr(dram, b, b.base_address + off), 0, 2048);
        }
        benchmark::DoNotOptimize(noc.read_done(0));
    }
    s.SetItemsProcessed(s.iterations() * 512);
}
BENCHMARK(BM_NocSchedule);

void BM_StreamSmall(benchmark::State& s) {
    StreamConfig c;
    c.width = 1024;
    c.height = 64;
    c.batch_size = static_cast<std::uint32_t>(s.range(0));
    const CostParams& p = calibrated_params();
    for (auto _ : s) benchmark::DoNotOptimize(run_stream(c, p).seconds);
}
BENCHMARK(BM_StreamSmall)->Arg(4096)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Jacobi(benchmark::State& s) {
    JacobiConfig c;
    c.domain.nx = c.domain.ny = 128;
    c.iterations = 10;
    c.variant = static_cast<Variant>(s.range(0));
    c.cores = 4;
    const CostParams& p = calibrated_params();
    for (auto _ : s) benchmark::DoNotOptimize(run_jacobi(c, p).seconds);
    s.SetLabel(std::string(to_string(c.variant)));
}
BENCHMARK(BM_Jacobi)
    ->Arg(static_cast<int>(Variant::Initial))
    ->Arg(static_cast<int>(Variant::Optimized))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

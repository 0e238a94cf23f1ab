// Parallel kernels against their serial references.
//   ./oadr_bench --benchmark_filter=L2

#include <benchmark/benchmark.h>

#include <random>

#include "oadr/kernels.hpp"

namespace {

std::vector<float> gaussian(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    std::vector<float> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

template <auto Kernel>
void BM_L2(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const std::size_t dim = 768;
    const auto q = gaussian(dim, 1);
    const auto m = gaussian(rows * dim, 2);
    std::vector<double> out(rows);
    for (auto _ : state) {
        Kernel(q, m, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

struct Batch {
    std::vector<float> data;
    std::vector<oadr::kernels::TripletView> views;
    oadr::LinearAdapter adapter;
};

Batch make_batch(std::size_t n, std::uint32_t dim) {
    Batch b{gaussian(n * 3 * dim, 3), {}, oadr::LinearAdapter::identity(dim)};
    for (std::size_t i = 0; i < n; ++i) {
        const float* p = b.data.data() + i * 3 * dim;
        b.views.push_back({{p, dim}, {p + dim, dim}, {p + 2 * dim, dim}});
    }
    return b;
}

template <auto Kernel>
void BM_BatchGradient(benchmark::State& state) {
    const auto batch = make_batch(static_cast<std::size_t>(state.range(0)), static_cast<std::uint32_t>(state.range(1)));
    for (auto _ : state) {
        auto g = Kernel(batch.views, batch.adapter, 5.0, 1e-12);
        benchmark::DoNotOptimize(g.d_weights.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_L2<oadr::kernels::reference::l2_distances>)->Name("L2/serial")->Arg(400)->Arg(4000)->Arg(40000);
BENCHMARK(BM_L2<oadr::kernels::l2_distances>)->Name("L2/parallel")->Arg(400)->Arg(4000)->Arg(40000)->UseRealTime();

BENCHMARK(BM_BatchGradient<oadr::kernels::reference::batch_gradient>)
    ->Name("BatchGradient/serial")
    ->Args({8, 256})
    ->Args({64, 256});
BENCHMARK(BM_BatchGradient<oadr::kernels::batch_gradient>)
    ->Name("BatchGradient/parallel")
    ->Args({8, 256})
    ->Args({64, 256})
    ->UseRealTime();

BENCHMARK_MAIN();

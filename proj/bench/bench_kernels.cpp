#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "nsinflow/kernels.hpp"

using namespace nsinflow;

namespace {

std::vector<double> noisy(std::size_t m, double base, double amp, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-amp, amp);
    std::vector<double> v(m);
    for (auto& x : v) x = base + d(gen);
    return v;
}

struct Fields {
    GridPtr g;
    std::vector<double> rho, u, src, r_pow, rf_pow;
    explicit Fields(std::size_t m)
        : g(make_grid(200.0, m)), rho(noisy(m, 1.0, 0.05, 1)), u(noisy(m, 0.05, 0.02, 2)), src(noisy(m, 0.0, 1e-4, 3)),
          r_pow(m), rf_pow(m - 1) {
        for (std::size_t i = 0; i < m; ++i) r_pow[i] = (*g)[i];
        for (std::size_t i = 0; i + 1 < m; ++i) rf_pow[i] = (*g)[i] + 0.5 * g->dr();
    }
};

template <bool Parallel>
void BM_Forcing(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto g = make_grid(200.0, m);
    const auto c = kernels::ForcingConstants::from(Parameters{});
    const auto eta = noisy(m, 0.0, 0.01, 4), far = noisy(m, 0.0, 1e-3, 5);
    std::vector<double> out(m);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::forcing_parallel(g->nodes(), eta, far, out, c);
        else
            kernels::forcing_serial(g->nodes(), eta, far, out, c);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(m));
}

template <bool Parallel>
void BM_Density(benchmark::State& state) {
    const Fields f(static_cast<std::size_t>(state.range(0)));
    const kernels::DensityUpdate in{f.g->nodes(), f.r_pow, f.rf_pow, f.rho, f.u, f.src, f.g->dr(), 1e-3, false};
    std::vector<double> out(f.rho);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::density_update_parallel(in, out);
        else
            kernels::density_update_serial(in, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_VelocityRows(benchmark::State& state) {
    const Fields f(static_cast<std::size_t>(state.range(0)));
    const std::size_t m = f.rho.size();
    const kernels::VelocityUpdate in{f.g->nodes(), f.rho, f.u, f.src, 2, 2.0, 1.0, 1.0, f.g->dr(), 1e-3};
    std::vector<double> lo(m), di(m), up(m), rhs(m);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::velocity_rows_parallel(in, {lo, di, up, rhs});
        else
            kernels::velocity_rows_serial(in, {lo, di, up, rhs});
        benchmark::DoNotOptimize(rhs.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void grid_sizes(benchmark::internal::Benchmark* b) {
    for (long m : {4097, 16385, 65537, 262145}) b->Arg(m);
}

}  // namespace

BENCHMARK(BM_Forcing<false>)->Apply(grid_sizes);
BENCHMARK(BM_Forcing<true>)->Apply(grid_sizes);
BENCHMARK(BM_Density<false>)->Apply(grid_sizes);
BENCHMARK(BM_Density<true>)->Apply(grid_sizes);
BENCHMARK(BM_VelocityRows<false>)->Apply(grid_sizes);
BENCHMARK(BM_VelocityRows<true>)->Apply(grid_sizes);

BENCHMARK_MAIN();

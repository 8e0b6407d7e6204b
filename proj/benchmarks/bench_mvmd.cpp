#include <benchmark/benchmark.h>

#include <cmath>

#include "log2sig/mvmd.hpp"
#include "log2sig/rng.hpp"

namespace {

using namespace log2sig;

Matrix activity_matrix(std::size_t channels, std::size_t days, std::uint64_t seed) {
    Rng rng(seed);
    Matrix f(channels, days);
    for (std::size_t c = 0; c < channels; ++c) {
        const double base = 2.0 + 3.0 * double(c);
        for (std::size_t t = 0; t < days; ++t) {
            const double weekly = 1.0 + 0.4 * std::sin(2.0 * 3.14159265 * double(t) / 7.0);
            f(c, t) = double(rng.poisson(base * weekly));
        }
    }
    return f;
}

void bm_decompose(benchmark::State& state) {
    const Matrix f = activity_matrix(7, std::size_t(state.range(0)), 5);
    MvmdConfig cfg;
    cfg.K = int(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(decompose(f, cfg));
    }
}
BENCHMARK(bm_decompose)->Args({200, 3})->Args({200, 7})->Args({400, 3})->Unit(benchmark::kMillisecond);

void bm_analytic_signal(benchmark::State& state) {
    Rng rng(6);
    std::vector<double> x(std::size_t(state.range(0)));
    for (double& v : x) v = rng.normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(analytic_signal(x));
    }
}
BENCHMARK(bm_analytic_signal)->Arg(256)->Arg(400)->Arg(1024);

}  // namespace

#include <benchmark/benchmark.h>

#include "log2sig/trainer.hpp"

namespace {

using namespace log2sig;

template <typename T>
struct Fixture {
    EncoderConfig cfg;
    ModelParams<T> model;
    std::vector<DaySample> samples;
    std::vector<const DaySample*> batch;
    std::vector<std::uint64_t> seeds;

    explicit Fixture(int l_max, int batch_size) {
        cfg.d = 64;
        cfg.n_layers = 2;
        cfg.l_max = l_max;
        cfg.vocab_size = 11;
        cfg.k_modes = 3;
        cfg.channels = 7;
        cfg.dropout = 0.3;
        Rng rng(1);
        model = init_model<T>(cfg, rng);
        Rng srng(2);
        for (int i = 0; i < batch_size; ++i) {
            DaySample s;
            s.tokens.assign(l_max, 0);
            const int real = 10 + int(srng.uniform_index(30));
            for (int t = l_max - real; t < l_max; ++t) {
                s.tokens[t] = 1 + std::int32_t(srng.uniform_index(10));
            }
            s.real_len = real;
            s.z.assign(cfg.pseudo_tokens(), 0.0);
            for (double& v : s.z) v = srng.normal(5.0, 3.0);
            s.label = i % 2;
            samples.push_back(std::move(s));
        }
        for (const auto& s : samples) batch.push_back(&s);
        seeds.assign(samples.size(), 99);
    }
};

template <typename T>
void bm_forward_backward(benchmark::State& state) {
    Fixture<T> fx(int(state.range(0)), 32);
    BatchRunner<T> runner(int(state.range(1)));
    auto grads = zeros_like(fx.model);
    for (auto _ : state) {
        for (auto& [name, t] : grads.named_tensors()) {
            (void)name;
            t->fill(T(0));
        }
        benchmark::DoNotOptimize(
            runner.forward_backward(fx.batch, fx.model, grads, true, fx.seeds));
    }
    state.SetItemsProcessed(std::int64_t(state.iterations()) * 32);
}
BENCHMARK(bm_forward_backward<float>)
    ->Args({128, 1})
    ->Args({128, 2})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_forward_backward<double>)
    ->Args({128, 1})
    ->Args({128, 2})
    ->Unit(benchmark::kMillisecond);

}  // namespace

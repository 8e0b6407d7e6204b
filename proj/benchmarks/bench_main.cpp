#include <benchmark/benchmark.h>

#include "log2sig/nn/gemm.hpp"

int main(int argc, char** argv) {
    log2sig::nn::ensure_fast_blas(argv);
    log2sig::nn::configure_blas_single_thread();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}

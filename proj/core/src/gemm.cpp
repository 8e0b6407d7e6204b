#include "log2sig/nn/gemm.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#if defined(__linux__)
#include <unistd.h>
#endif

#include <cblas.h>
#ifdef _OPENMP
#include <omp.h>
#endif

// Resolve to null when the linked BLAS is not OpenBLAS.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));
extern "C" char* openblas_get_corename(void) __attribute__((weak));

namespace log2sig::nn {

void configure_blas_single_thread() {
    setenv("OPENBLAS_NUM_THREADS", "1", 0);
    if (openblas_set_num_threads) openblas_set_num_threads(1);
}

void ensure_fast_blas(char** argv) {
#if defined(__linux__) && defined(__x86_64__)
    if (!openblas_get_corename) return;
    if (getenv("OPENBLAS_CORETYPE") || getenv("LOG2SIG_BLAS_REEXEC")) return;

    const std::string core = openblas_get_corename();
    static const char* kSlowCores[] = {"Prescott", "Katmai", "Northwood", "Banias",
                                       "Core2", "generic", "Atom", "Nehalem"};
    bool slow = false;
    for (const char* c : kSlowCores) slow = slow || core == c;
    if (!slow) return;

    const char* want = nullptr;
    if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512bw") &&
        __builtin_cpu_supports("avx512dq") && __builtin_cpu_supports("avx512vl")) {
        want = "SKYLAKEX";
    } else if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        want = "HASWELL";
    }
    if (!want) return;

    setenv("OPENBLAS_CORETYPE", want, 1);
    setenv("LOG2SIG_BLAS_REEXEC", "1", 1);
    execv("/proc/self/exe", argv);
    // exec failed: continue with the slow kernels
#else
    (void)argv;
#endif
}

void gemm_raw(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
              int lda, const double* b, int ldb, double beta, double* c, int ldc) {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c,
                ldc);
}

void gemm_raw(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
              int lda, const float* b, int ldb, float beta, float* c, int ldc) {
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c,
                ldc);
}

template <typename T>
void matmul_mt(const Tensor2<T>& a, const Tensor2<T>& b, Tensor2<T>& c, bool trans_a,
               bool trans_b, T alpha, T beta, int n_threads) {
    const std::size_t m = trans_a ? a.cols : a.rows;
    const std::size_t inner = trans_a ? a.rows : a.cols;
    const std::size_t inner_b = trans_b ? b.cols : b.rows;
    const std::size_t n = trans_b ? b.rows : b.cols;
    if (inner != inner_b) {
        throw DimensionError("matmul_mt: inner dimensions " + std::to_string(inner) + " vs " +
                             std::to_string(inner_b));
    }
    if (c.rows != m || c.cols != n) {
        if (beta != T(0)) throw DimensionError("matmul_mt: accumulate into wrong-shaped output");
        c = Tensor2<T>(m, n);
    }
    if (n_threads <= 1 || m < 2 || m * n * inner < (std::size_t(1) << 20)) {
        gemm_raw(trans_a, trans_b, int(m), int(n), int(inner), alpha, a.data.data(),
                 int(a.cols), b.data.data(), int(b.cols), beta, c.data.data(), int(c.cols));
        return;
    }
    const int nt = std::min<int>(n_threads, int(m));
#pragma omp parallel num_threads(nt)
    {
#ifdef _OPENMP
        const int tid = omp_get_thread_num();
#else
        const int tid = 0;
#endif
        const std::size_t r0 = m * std::size_t(tid) / nt;
        const std::size_t r1 = m * std::size_t(tid + 1) / nt;
        if (r1 > r0) {
            // Row block of C comes from a row block of op(A).
            const T* a_block = trans_a ? a.data.data() + r0 : a.data.data() + r0 * a.cols;
            gemm_raw(trans_a, trans_b, int(r1 - r0), int(n), int(inner), alpha, a_block,
                     int(a.cols), b.data.data(), int(b.cols), beta,
                     c.data.data() + r0 * c.cols, int(c.cols));
        }
    }
}

template void matmul_mt<float>(const Tensor2<float>&, const Tensor2<float>&, Tensor2<float>&,
                               bool, bool, float, float, int);
template void matmul_mt<double>(const Tensor2<double>&, const Tensor2<double>&,
                                Tensor2<double>&, bool, bool, double, double, int);

}  // namespace log2sig::nn

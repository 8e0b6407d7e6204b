#pragma once

#include "log2sig/tensor.hpp"

namespace log2sig::nn {

// Row-major C = alpha * op(A) * op(B) + beta * C backed by CBLAS.
void gemm_raw(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
              const double* a, int lda, const double* b, int ldb, double beta, double* c,
              int ldc);
void gemm_raw(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
              int lda, const float* b, int ldb, float beta, float* c, int ldc);

// Caps the BLAS backend's own threading; sample-level parallelism happens in
// the trainer instead. Safe to call more than once.
void configure_blas_single_thread();

// OpenBLAS picks its kernels at load time from CPUID, which virtualized
// hosts often mask; that can silently select a pre-AVX target. When a
// mismatch is detected this sets OPENBLAS_CORETYPE to match the actual ISA
// and re-execs the process once. Call first thing in main().
void ensure_fast_blas(char** argv);

template <typename T>
void matmul(const Tensor2<T>& a, const Tensor2<T>& b, Tensor2<T>& c, bool trans_a = false,
            bool trans_b = false, T alpha = T(1), T beta = T(0)) {
    const std::size_t m = trans_a ? a.cols : a.rows;
    const std::size_t inner = trans_a ? a.rows : a.cols;
    const std::size_t inner_b = trans_b ? b.cols : b.rows;
    const std::size_t n = trans_b ? b.rows : b.cols;
    if (inner != inner_b) {
        throw DimensionError("matmul: inner dimensions " + std::to_string(inner) + " vs " +
                             std::to_string(inner_b));
    }
    if (c.rows != m || c.cols != n) {
        if (beta != T(0)) throw DimensionError("matmul: accumulate into wrong-shaped output");
        c = Tensor2<T>(m, n);
    }
    gemm_raw(trans_a, trans_b, int(m), int(n), int(inner), alpha, a.data.data(), int(a.cols),
             b.data.data(), int(b.cols), beta, c.data.data(), int(c.cols));
}

// y (1 x n) = x (1 x d) * A (d x n), accumulating onto y. Hand-rolled: the
// scan calls this once per time step, where GEMM call overhead dominates.
template <typename T>
inline void row_times_matrix_add(const T* x, const Tensor2<T>& a, T* y) {
    for (std::size_t i = 0; i < a.rows; ++i) {
        const T xi = x[i];
        if (xi == T(0)) continue;
        const T* arow = a.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) y[j] += xi * arow[j];
    }
}

// matmul with the output rows split across threads. Each element is still
// produced by exactly one single-threaded GEMM call, so results are
// bit-identical for any thread count.
template <typename T>
void matmul_mt(const Tensor2<T>& a, const Tensor2<T>& b, Tensor2<T>& c, bool trans_a,
               bool trans_b, T alpha, T beta, int n_threads);

}  // namespace log2sig::nn

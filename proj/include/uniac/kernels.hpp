#pragma once

#include <cstddef>

namespace uniac::kern {

// Global switch for the OpenMP kernel variants. 0 threads = serial reference.
// Serial and parallel paths share the same per-row/per-chunk inner helpers,
// so for every kernel below the two variants produce bit-identical output.
void set_threads(int n);
int threads();

// C[m,n] = A[m,k] * B[k,n]           (all row-major, C overwritten)
void gemm_nn_serial(std::size_t m, std::size_t n, std::size_t k,
                    const double* A, const double* B, double* C);
void gemm_nn_omp(std::size_t m, std::size_t n, std::size_t k,
                 const double* A, const double* B, double* C);

// C[m,n] = A[m,k] * B[n,k]^T
void gemm_nt_serial(std::size_t m, std::size_t n, std::size_t k,
                    const double* A, const double* B, double* C);
void gemm_nt_omp(std::size_t m, std::size_t n, std::size_t k,
                 const double* A, const double* B, double* C);

// C[k,n] = A[m,k]^T * B[m,n]
void gemm_tn_serial(std::size_t m, std::size_t n, std::size_t k,
                    const double* A, const double* B, double* C);
void gemm_tn_omp(std::size_t m, std::size_t n, std::size_t k,
                 const double* A, const double* B, double* C);

// Dispatchers: pick the OpenMP variant when enabled and the problem is big
// enough to amortize fork/join. Both variants agree bitwise, so dispatch
// never changes results.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* A, const double* B, double* C);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* A, const double* B, double* C);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* A, const double* B, double* C);

// Elementwise map/zip over n entries.
using UnaryFn = double (*)(double);
using BinaryFn = double (*)(double, double);
void map_serial(std::size_t n, const double* x, double* y, UnaryFn f);
void map_omp(std::size_t n, const double* x, double* y, UnaryFn f);
void map(std::size_t n, const double* x, double* y, UnaryFn f);
void zip_serial(std::size_t n, const double* a, const double* b, double* y, BinaryFn f);
void zip_omp(std::size_t n, const double* a, const double* b, double* y, BinaryFn f);
void zip(std::size_t n, const double* a, const double* b, double* y, BinaryFn f);

// Order-fixed chunked sum: partials over fixed 2048-wide chunks, combined in
// chunk order, so the serial and parallel results are the same doubles.
double sum_serial(std::size_t n, const double* x);
double sum_omp(std::size_t n, const double* x);
double sum(std::size_t n, const double* x);

// Row-wise layer normalization over the last dimension plus affine gain/bias;
// also emits per-row mean and inverse stddev for the backward pass.
void layer_norm_rows_serial(std::size_t rows, std::size_t cols, const double* x,
                            const double* gain, const double* bias, double eps,
                            double* y, double* mean, double* inv_std);
void layer_norm_rows_omp(std::size_t rows, std::size_t cols, const double* x,
                         const double* gain, const double* bias, double eps,
                         double* y, double* mean, double* inv_std);
void layer_norm_rows(std::size_t rows, std::size_t cols, const double* x,
                     const double* gain, const double* bias, double eps,
                     double* y, double* mean, double* inv_std);

}  // namespace uniac::kern

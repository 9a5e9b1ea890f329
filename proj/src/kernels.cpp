#include "uniac/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uniac::kern {

namespace {

std::atomic<int> g_threads{0};

constexpr std::size_t kParallelFlops = 1u << 16;
constexpr std::size_t kSumChunk = 2048;

// Inner helpers are noinline on purpose: both the serial and OpenMP drivers
// call the exact same machine code, which is what makes their outputs
// bit-identical regardless of dispatch.

__attribute__((noinline)) void gemm_nn_row(std::size_t n, std::size_t k,
                                           const double* a_row, const double* B,
                                           double* c_row) {
  for (std::size_t j = 0; j < n; ++j) c_row[j] = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double a = a_row[p];
    const double* b_row = B + p * n;
    for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
  }
}

__attribute__((noinline)) void gemm_nt_row(std::size_t n, std::size_t k,
                                           const double* a_row, const double* B,
                                           double* c_row) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* b_row = B + j * k;
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
    c_row[j] = acc;
  }
}

// One output row of C[k,n] = A^T B; accumulates over the m samples.
__attribute__((noinline)) void gemm_tn_row(std::size_t m, std::size_t n,
                                           std::size_t k, std::size_t kk,
                                           const double* A, const double* B,
                                           double* c_row) {
  for (std::size_t j = 0; j < n; ++j) c_row[j] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = A[i * k + kk];
    const double* b_row = B + i * n;
    for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
  }
}

__attribute__((noinline)) double sum_chunk(std::size_t n, const double* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

__attribute__((noinline)) void layer_norm_row(std::size_t cols, const double* x,
                                              const double* gain,
                                              const double* bias, double eps,
                                              double* y, double* mean,
                                              double* inv_std) {
  double mu = 0.0;
  for (std::size_t j = 0; j < cols; ++j) mu += x[j];
  mu /= double(cols);
  double var = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    const double d = x[j] - mu;
    var += d * d;
  }
  var /= double(cols);
  const double is = 1.0 / std::sqrt(var + eps);
  for (std::size_t j = 0; j < cols; ++j)
    y[j] = (x[j] - mu) * is * gain[j] + bias[j];
  *mean = mu;
  *inv_std = is;
}

bool use_parallel(std::size_t flops) {
#ifdef _OPENMP
  return g_threads.load(std::memory_order_relaxed) > 1 && flops >= kParallelFlops;
#else
  (void)flops;
  return false;
#endif
}

int clamp_threads() {
  int t = g_threads.load(std::memory_order_relaxed);
  return t < 1 ? 1 : t;
}

}  // namespace

void set_threads(int n) { g_threads.store(n, std::memory_order_relaxed); }
int threads() { return g_threads.load(std::memory_order_relaxed); }

void gemm_nn_serial(std::size_t m, std::size_t n, std::size_t k,
                    const double* A, const double* B, double* C) {
  for (std::size_t i = 0; i < m; ++i)
    gemm_nn_row(n, k, A + i * k, B, C + i * n);
}

void gemm_nn_omp(std::size_t m, std::size_t n, std::size_t k,
                 const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(m); ++i)
    gemm_nn_row(n, k, A + std::size_t(i) * k, B, C + std::size_t(i) * n);
}

void gemm_nt_serial(std::size_t m, std::size_t n, std::size_t k,
                    const double* A, const double* B, double* C) {
  for (std::size_t i = 0; i < m; ++i)
    gemm_nt_row(n, k, A + i * k, B, C + i * n);
}

void gemm_nt_omp(std::size_t m, std::size_t n, std::size_t k,
                 const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(m); ++i)
    gemm_nt_row(n, k, A + std::size_t(i) * k, B, C + std::size_t(i) * n);
}

void gemm_tn_serial(std::size_t m, std::size_t n, std::size_t k,
                    const double* A, const double* B, double* C) {
  for (std::size_t kk = 0; kk < k; ++kk)
    gemm_tn_row(m, n, k, kk, A, B, C + kk * n);
}

void gemm_tn_omp(std::size_t m, std::size_t n, std::size_t k,
                 const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
  for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(k); ++kk)
    gemm_tn_row(m, n, k, std::size_t(kk), A, B, C + std::size_t(kk) * n);
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* A, const double* B, double* C) {
  if (use_parallel(m * n * k)) gemm_nn_omp(m, n, k, A, B, C);
  else gemm_nn_serial(m, n, k, A, B, C);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* A, const double* B, double* C) {
  if (use_parallel(m * n * k)) gemm_nt_omp(m, n, k, A, B, C);
  else gemm_nt_serial(m, n, k, A, B, C);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* A, const double* B, double* C) {
  if (use_parallel(m * n * k)) gemm_tn_omp(m, n, k, A, B, C);
  else gemm_tn_serial(m, n, k, A, B, C);
}

void map_serial(std::size_t n, const double* x, double* y, UnaryFn f) {
  for (std::size_t i = 0; i < n; ++i) y[i] = f(x[i]);
}

void map_omp(std::size_t n, const double* x, double* y, UnaryFn f) {
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) y[i] = f(x[i]);
}

void map(std::size_t n, const double* x, double* y, UnaryFn f) {
  if (use_parallel(n * 8)) map_omp(n, x, y, f);
  else map_serial(n, x, y, f);
}

void zip_serial(std::size_t n, const double* a, const double* b, double* y,
                BinaryFn f) {
  for (std::size_t i = 0; i < n; ++i) y[i] = f(a[i], b[i]);
}

void zip_omp(std::size_t n, const double* a, const double* b, double* y,
             BinaryFn f) {
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) y[i] = f(a[i], b[i]);
}

void zip(std::size_t n, const double* a, const double* b, double* y, BinaryFn f) {
  if (use_parallel(n * 8)) zip_omp(n, a, b, y, f);
  else zip_serial(n, a, b, y, f);
}

double sum_serial(std::size_t n, const double* x) {
  double acc = 0.0;
  for (std::size_t c = 0; c < n; c += kSumChunk) {
    const std::size_t len = (c + kSumChunk <= n) ? kSumChunk : n - c;
    acc += sum_chunk(len, x + c);
  }
  return acc;
}

double sum_omp(std::size_t n, const double* x) {
  const std::size_t n_chunks = (n + kSumChunk - 1) / kSumChunk;
  std::vector<double> partial(n_chunks);
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
  for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(n_chunks); ++c) {
    const std::size_t off = std::size_t(c) * kSumChunk;
    const std::size_t len = (off + kSumChunk <= n) ? kSumChunk : n - off;
    partial[std::size_t(c)] = sum_chunk(len, x + off);
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

double sum(std::size_t n, const double* x) {
  if (use_parallel(n)) return sum_omp(n, x);
  return sum_serial(n, x);
}

void layer_norm_rows_serial(std::size_t rows, std::size_t cols, const double* x,
                            const double* gain, const double* bias, double eps,
                            double* y, double* mean, double* inv_std) {
  for (std::size_t i = 0; i < rows; ++i)
    layer_norm_row(cols, x + i * cols, gain, bias, eps, y + i * cols, mean + i,
                   inv_std + i);
}

void layer_norm_rows_omp(std::size_t rows, std::size_t cols, const double* x,
                         const double* gain, const double* bias, double eps,
                         double* y, double* mean, double* inv_std) {
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(rows); ++i)
    layer_norm_row(cols, x + std::size_t(i) * cols, gain, bias, eps,
                   y + std::size_t(i) * cols, mean + i, inv_std + i);
}

void layer_norm_rows(std::size_t rows, std::size_t cols, const double* x,
                     const double* gain, const double* bias, double eps,
                     double* y, double* mean, double* inv_std) {
  if (use_parallel(rows * cols * 4))
    layer_norm_rows_omp(rows, cols, x, gain, bias, eps, y, mean, inv_std);
  else
    layer_norm_rows_serial(rows, cols, x, gain, bias, eps, y, mean, inv_std);
}

}  // namespace uniac::kern

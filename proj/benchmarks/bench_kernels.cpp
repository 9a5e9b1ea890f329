// Serial reference vs OpenMP kernels, plus a full MLP forward/backward pass
// through the tape at training-relevant sizes.

#include <benchmark/benchmark.h>

#include <thread>

#include "uniac/kernels.hpp"
#include "uniac/nn.hpp"
#include "uniac/ops.hpp"
#include "uniac/rng.hpp"

namespace {

using namespace uniac;

std::vector<double> rand_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void bench_gemm(benchmark::State& state, bool parallel) {
  const auto m = std::size_t(state.range(0));
  const auto k = std::size_t(state.range(1));
  const auto n = std::size_t(state.range(2));
  Rng rng(1);
  const std::vector<double> a = rand_vec(m * k, rng);
  const std::vector<double> b = rand_vec(k * n, rng);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    if (parallel)
      kern::gemm_nn_omp(m, n, k, a.data(), b.data(), c.data());
    else
      kern::gemm_nn_serial(m, n, k, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) *
                          std::int64_t(2 * m * n * k));
}

void gemm_serial(benchmark::State& state) { bench_gemm(state, false); }
void gemm_omp(benchmark::State& state) { bench_gemm(state, true); }

void bench_sum(benchmark::State& state, bool parallel) {
  const auto n = std::size_t(state.range(0));
  Rng rng(2);
  const std::vector<double> x = rand_vec(n, rng);
  for (auto _ : state) {
    double s = parallel ? kern::sum_omp(n, x.data())
                        : kern::sum_serial(n, x.data());
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(n));
}

void sum_serial_bench(benchmark::State& state) { bench_sum(state, false); }
void sum_omp_bench(benchmark::State& state) { bench_sum(state, true); }

// One critic-style regression step: forward, MSE, backward.
void bench_mlp_train_step(benchmark::State& state, int threads) {
  kern::set_threads(threads);
  const auto batch = std::size_t(state.range(0));
  const auto width = std::size_t(state.range(1));
  Rng rng(3);
  MlpSpec spec;
  spec.layer_widths = {4, width, width, 1};
  Mlp net = Mlp::init(spec, rng);
  Tensor x = Tensor::from({batch, 4}, rand_vec(batch * 4, rng));
  Tensor y = Tensor::from({batch}, rand_vec(batch, rng));
  for (auto _ : state) {
    for (Tensor p : net.parameters()) p.zero_grad();
    Tensor out = net.forward(x);
    Tensor loss = mean(square(sub(reshape(out, {batch}), y)));
    backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
  kern::set_threads(0);
}

void mlp_step_serial(benchmark::State& state) { bench_mlp_train_step(state, 0); }
void mlp_step_omp(benchmark::State& state) {
  bench_mlp_train_step(state, int(std::thread::hardware_concurrency()));
}

}  // namespace

BENCHMARK(gemm_serial)->Args({64, 128, 64})->Args({256, 256, 256})->Args({1024, 512, 256});
BENCHMARK(gemm_omp)->Args({64, 128, 64})->Args({256, 256, 256})->Args({1024, 512, 256});
BENCHMARK(sum_serial_bench)->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(sum_omp_bench)->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(mlp_step_serial)->Args({64, 128})->Args({256, 256});
BENCHMARK(mlp_step_omp)->Args({64, 128})->Args({256, 256});

BENCHMARK_MAIN();

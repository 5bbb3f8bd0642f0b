// Serial vs OpenMP kernels at the shapes the detector network uses.

#include <benchmark/benchmark.h>

#include <vector>

#include "tinycompress/kernels.hpp"
#include "tinycompress/rng.hpp"

namespace tc::kernels {
using GemmFn = void (*)(std::size_t, std::size_t, std::size_t, std::span<const float>, std::span<const float>,
                       std::span<float>);
}

namespace {

std::vector<float> random_block(std::size_t n, std::uint64_t seed) {
  tc::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

// Batch × fan_in times fan_in × fan_out, as in a forward pass.
template <tc::kernels::GemmFn Gemm>
void BM_gemm(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_block(m * k, 1);
  const auto b = random_block(k * n, 2);
  std::vector<float> c(m * n);
  for (auto _ : state) {
    Gemm(m, n, k, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n * k));
}

template <tc::kernels::GemmFn Gemm>
void BM_gemm_at_b(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_block(k * m, 3);
  const auto b = random_block(k * n, 4);
  std::vector<float> c(m * n);
  for (auto _ : state) {
    Gemm(m, n, k, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n * k));
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({64, 52, 64})->Args({64, 256, 128})->Args({512, 128, 256})->Args({2048, 256, 128});
}

}  // namespace

BENCHMARK(BM_gemm<tc::kernels::serial::gemm>)->Apply(shapes);
BENCHMARK(BM_gemm<tc::kernels::omp::gemm>)->Apply(shapes);
BENCHMARK(BM_gemm_at_b<tc::kernels::serial::gemm_at_b>)->Apply(shapes);
BENCHMARK(BM_gemm_at_b<tc::kernels::omp::gemm_at_b>)->Apply(shapes);

BENCHMARK_MAIN();

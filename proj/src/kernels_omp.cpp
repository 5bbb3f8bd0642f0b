#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdint>

#include "tinycompress/kernels.hpp"

namespace tc::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kMinParallelWork = 1u << 15;

bool go_parallel(std::size_t work) {
  return g_parallel.load(std::memory_order_relaxed) && work >= kMinParallelWork && !omp_in_parallel() &&
         omp_get_max_threads() > 1;
}

}  // namespace

namespace omp {

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
          std::span<float> c) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    float* ci = c.data() + i * n;
    std::fill(ci, ci + n, 0.0f);
    for (std::size_t p = 0; p < k; ++p) {
      const float aip = a[i * k + p];
      const float* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_at_b(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
               std::span<float> c) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    float* ci = c.data() + i * n;
    std::fill(ci, ci + n, 0.0f);
    for (std::size_t p = 0; p < k; ++p) {
      const float api = a[p * m + i];
      const float* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void transpose(std::size_t m, std::size_t n, std::span<const float> in, std::span<float> out) {
  const auto cols = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t jj = 0; jj < cols; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t i = 0; i < m; ++i) out[j * m + i] = in[i * n + j];
  }
}

}  // namespace omp

void set_parallel(bool enabled) noexcept { g_parallel.store(enabled, std::memory_order_relaxed); }
bool parallel_enabled() noexcept { return g_parallel.load(std::memory_order_relaxed); }

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
          std::span<float> c) {
  if (go_parallel(m * n * k))
    omp::gemm(m, n, k, a, b, c);
  else
    serial::gemm(m, n, k, a, b, c);
}

void gemm_at_b(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
               std::span<float> c) {
  if (go_parallel(m * n * k))
    omp::gemm_at_b(m, n, k, a, b, c);
  else
    serial::gemm_at_b(m, n, k, a, b, c);
}

void transpose(std::size_t m, std::size_t n, std::span<const float> in, std::span<float> out) {
  if (go_parallel(m * n * 8))
    omp::transpose(m, n, in, out);
  else
    serial::transpose(m, n, in, out);
}

}  // namespace tc::kernels

#include <algorithm>

#include "tinycompress/kernels.hpp"

namespace tc::kernels::serial {

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
          std::span<float> c) {
  std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(m * n), 0.0f);
  for (std::size_t i = 0; i < m; ++i) {
    float* ci = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float aip = a[i * k + p];
      const float* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_at_b(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
               std::span<float> c) {
  std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(m * n), 0.0f);
  for (std::size_t p = 0; p < k; ++p) {
    const float* ap = a.data() + p * m;
    const float* bp = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const float api = ap[i];
      float* ci = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void transpose(std::size_t m, std::size_t n, std::span<const float> in, std::span<float> out) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
}

}  // namespace tc::kernels::serial

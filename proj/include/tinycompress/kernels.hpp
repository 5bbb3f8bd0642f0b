#pragma once

// Matrix-product kernels used by training and inference.
//
// Each kernel exists twice: a serial reference and an OpenMP version that
// splits work over output rows. Both accumulate every output element over
// the shared dimension in ascending order, so their results are bit-identical
// and the parallel path never changes a trained model.

#include <cstddef>
#include <span>

namespace tc::kernels {

namespace serial {

/// C[m×n] = A[m×k] · B[k×n]
void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
          std::span<float> c);

/// C[m×n] = A[k×m]ᵀ · B[k×n]
void gemm_at_b(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
               std::span<float> c);

/// out[n×m] = in[m×n]ᵀ
void transpose(std::size_t m, std::size_t n, std::span<const float> in, std::span<float> out);

}  // namespace serial

namespace omp {

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
          std::span<float> c);
void gemm_at_b(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
               std::span<float> c);
void transpose(std::size_t m, std::size_t n, std::span<const float> in, std::span<float> out);

}  // namespace omp

// Dispatching entry points. They use the OpenMP kernels unless disabled with
// set_parallel(false); inside an enclosing parallel region they run serially.
void set_parallel(bool enabled) noexcept;
bool parallel_enabled() noexcept;

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
          std::span<float> c);
void gemm_at_b(std::size_t m, std::size_t n, std::size_t k, std::span<const float> a, std::span<const float> b,
               std::span<float> c);
void transpose(std::size_t m, std::size_t n, std::span<const float> in, std::span<float> out);

}  // namespace tc::kernels

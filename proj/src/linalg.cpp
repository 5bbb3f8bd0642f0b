#include "tinycompress/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tinycompress/errors.hpp"
#include "tinycompress/kernels.hpp"

namespace tc {

Matrix::Matrix(std::size_t rows, std::size_t cols, float fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<float>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0f;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  kernels::transpose(rows_, cols_, data_, t.data_);
  return t;
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  kernels::gemm(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data());
  return c;
}

Vector relu(std::span<const float> v) {
  Vector out(v.begin(), v.end());
  relu_inplace(out);
  return out;
}

void relu_inplace(std::span<float> v) noexcept {
  for (auto& x : v) x = x > 0.0f ? x : 0.0f;
}

namespace {

void softmax_span(std::span<float> v) {
  const float mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (auto& x : v) {
    x = static_cast<float>(std::exp(static_cast<double>(x) - mx));
    total += x;
  }
  for (auto& x : v) x = static_cast<float>(x / total);
}

}  // namespace

Vector softmax(std::span<const float> scores) {
  if (scores.empty()) throw ArgumentError("softmax of an empty vector");
  Vector out(scores.begin(), scores.end());
  softmax_span(out);
  return out;
}

void softmax_rows(Matrix& m) {
  if (m.cols() == 0) throw ArgumentError("softmax of an empty vector");
  for (std::size_t r = 0; r < m.rows(); ++r) softmax_span(m.row(r));
}

std::size_t argmax(std::span<const float> v) {
  if (v.empty()) throw ArgumentError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace tc

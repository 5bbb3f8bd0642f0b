#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <string>

#include "tinycompress/compress.hpp"
#include "tinycompress/errors.hpp"

namespace tc::compress {

std::string_view to_string(StorageKind kind) noexcept {
  switch (kind) {
    case StorageKind::dense: return "Dense";
    case StorageKind::sparse: return "Sparse";
    case StorageKind::clustered: return "Clustered";
    case StorageKind::sparse_clustered: return "SparseClustered";
    case StorageKind::quantized: return "Quantized";
    case StorageKind::sparse_quantized: return "SparseQuantized";
    case StorageKind::clustered_quantized: return "ClusteredQuantized";
    case StorageKind::sparse_clustered_quantized: return "SparseClusteredQuantized";
  }
  return "Unknown";
}

float QuantizedBlock::dequantize(std::uint32_t code) const noexcept {
  return static_cast<float>(static_cast<double>(min) + static_cast<double>(code) * static_cast<double>(scale));
}

std::int64_t QuantizedBlock::zero_point() const noexcept {
  return static_cast<std::int64_t>(std::llround(-static_cast<double>(min) / static_cast<double>(scale)));
}

std::size_t ClusteredValues::k() const noexcept {
  return std::visit(
      [](const auto& cb) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(cb)>, QuantizedBlock>)
          return cb.codes.size();
        else
          return cb.size();
      },
      codebook);
}

unsigned ClusteredValues::index_bits() const noexcept {
  const std::size_t n = k();
  return n <= 2 ? 1u : static_cast<unsigned>(std::bit_width(n - 1));
}

std::vector<float> ClusteredValues::centroids() const {
  if (const auto* raw = std::get_if<std::vector<float>>(&codebook)) return *raw;
  const auto& q = std::get<QuantizedBlock>(codebook);
  std::vector<float> out;
  out.reserve(q.codes.size());
  for (auto c : q.codes) {
    if (c > q.max_code()) throw IntegrityError("codebook code exceeds its bit width");
    out.push_back(q.dequantize(c));
  }
  return out;
}

StorageKind CompressedLayer::kind() const noexcept {
  std::uint8_t bits = pattern ? 1 : 0;
  if (const auto* cv = std::get_if<ClusteredValues>(&values)) {
    bits |= 2;
    if (std::holds_alternative<QuantizedBlock>(cv->codebook)) bits |= 4;
  } else if (std::holds_alternative<QuantizedBlock>(values)) {
    bits |= 4;
  }
  return static_cast<StorageKind>(bits);
}

std::size_t CompressedLayer::value_count() const noexcept { return pattern ? pattern->nnz() : rows * cols; }

std::vector<float> CompressedLayer::stored_values() const {
  struct Decode {
    std::vector<float> operator()(const std::vector<float>& raw) const { return raw; }
    std::vector<float> operator()(const QuantizedBlock& q) const {
      std::vector<float> out;
      out.reserve(q.codes.size());
      for (auto c : q.codes) {
        if (c > q.max_code()) throw IntegrityError("quantized code exceeds its bit width");
        out.push_back(q.dequantize(c));
      }
      return out;
    }
    std::vector<float> operator()(const ClusteredValues& cv) const {
      const auto centroids = cv.centroids();
      std::vector<float> out;
      out.reserve(cv.indices.size());
      for (auto i : cv.indices) {
        if (i >= centroids.size()) throw IntegrityError("cluster index " + std::to_string(i) + " >= k");
        out.push_back(centroids[i]);
      }
      return out;
    }
  };
  auto out = std::visit(Decode{}, values);
  if (out.size() != value_count()) throw IntegrityError("stored value count does not match layer layout");
  return out;
}

Matrix CompressedLayer::reconstruct() const {
  validate();
  const auto vals = stored_values();
  if (!pattern) return Matrix(rows, cols, vals);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (auto p = pattern->row_ptr[r]; p < pattern->row_ptr[r + 1]; ++p) m(r, pattern->col_idx[p]) = vals[p];
  return m;
}

void CompressedLayer::validate() const {
  if (bias.size() != rows) throw IntegrityError("bias length does not match layer rows");
  if (pattern) {
    const auto& sp = *pattern;
    if (sp.row_ptr.size() != rows + 1 || sp.row_ptr.front() != 0 || sp.row_ptr.back() != sp.col_idx.size())
      throw IntegrityError("malformed CSR row pointers");
    for (std::size_t r = 0; r < rows; ++r) {
      if (sp.row_ptr[r] > sp.row_ptr[r + 1]) throw IntegrityError("CSR row pointers decrease");
      for (auto p = sp.row_ptr[r]; p < sp.row_ptr[r + 1]; ++p) {
        if (sp.col_idx[p] >= cols) throw IntegrityError("CSR column index out of range");
        if (p > sp.row_ptr[r] && sp.col_idx[p] <= sp.col_idx[p - 1])
          throw IntegrityError("CSR column indices not strictly increasing");
      }
    }
  }
  const std::size_t expected = value_count();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        std::size_t n = 0;
        if constexpr (std::is_same_v<T, std::vector<float>>)
          n = v.size();
        else if constexpr (std::is_same_v<T, QuantizedBlock>)
          n = v.codes.size();
        else
          n = v.indices.size();
        if (n != expected) throw IntegrityError("stored value count does not match layer layout");
      },
      values);
}

void PruneConfig::validate() const {
  if (mode == Mode::threshold) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw ArgumentError("prune threshold must be >= 0");
  } else {
    if (!(value >= 0.0) || !(value < 1.0))
      throw ArgumentError("target_sparsity must lie in [0, 1); 1 would empty the network");
  }
}

void ClusterConfig::validate() const {
  if (clusters < 1 || clusters_pruned < 1) throw ArgumentError("cluster count must be >= 1");
  if (clusters > 65535 || clusters_pruned > 65535) throw ArgumentError("cluster count must fit in 16 bits");
  if (max_iters == 0) throw ArgumentError("max_iters must be >= 1");
  if (finetune_epochs > 65535) throw ArgumentError("finetune_epochs must fit in 16 bits");
  if (finetune_epochs > 0 && !(finetune_learning_rate > 0.0))
    throw ArgumentError("finetune_learning_rate must be > 0");
  if (finetune_batch_size == 0) throw ArgumentError("finetune_batch_size must be >= 1");
}

void QuantConfig::validate() const {
  if (bits < 1 || bits > 16) throw ArgumentError("quantization bits must lie in [1, 16]");
}

Pipeline Pipeline::parse(std::string_view text) {
  Pipeline p;
  for (char ch : text) {
    bool* flag = nullptr;
    switch (std::tolower(static_cast<unsigned char>(ch))) {
      case 'p': flag = &p.prune; break;
      case 'c': flag = &p.cluster; break;
      case 'q': flag = &p.quantize; break;
      default: throw ArgumentError("unknown pipeline stage '" + std::string(1, ch) + "' in \"" + std::string(text) + "\"");
    }
    if (*flag) throw ArgumentError("pipeline stage repeated in \"" + std::string(text) + "\"");
    *flag = true;
  }
  if (p.empty()) throw ArgumentError("pipeline must name at least one stage");
  return p;
}

std::array<Pipeline, 7> Pipeline::all() {
  return {{{true, false, false},
           {false, true, false},
           {false, false, true},
           {true, true, false},
           {true, false, true},
           {false, true, true},
           {true, true, true}}};
}

std::uint8_t Pipeline::mask() const noexcept {
  return static_cast<std::uint8_t>((prune ? 1 : 0) | (cluster ? 2 : 0) | (quantize ? 4 : 0));
}

Pipeline Pipeline::from_mask(std::uint8_t mask) {
  if (mask > 7) throw ArgumentError("pipeline mask out of range");
  return {(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
}

std::string Pipeline::name() const {
  std::string s;
  if (prune) s += 'P';
  if (cluster) s += 'C';
  if (quantize) s += 'Q';
  return s;
}

CompressedModel CompressedModel::from_dense(const nn::DenseModel& model) {
  model.validate();
  CompressedModel out;
  out.arch = model.arch;
  for (const auto& l : model.layers) {
    CompressedLayer cl;
    cl.rows = l.weights.rows();
    cl.cols = l.weights.cols();
    cl.values = std::vector<float>(l.weights.data().begin(), l.weights.data().end());
    cl.bias = l.bias;
    out.layers.push_back(std::move(cl));
  }
  return out;
}

void CompressedModel::validate() const {
  if (arch.layer_sizes.empty()) {
    if (!layers.empty()) throw IntegrityError("layers present without an architecture");
    return;
  }
  if (layers.size() != arch.affine_count()) throw IntegrityError("layer count does not match architecture");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].rows != arch.layer_sizes[i + 1] || layers[i].cols != arch.layer_sizes[i])
      throw IntegrityError("layer " + std::to_string(i) + " dimensions do not match architecture");
    layers[i].validate();
  }
}

nn::DenseModel reconstruct(const CompressedModel& model) {
  model.validate();
  nn::DenseModel out{model.arch, {}};
  for (const auto& l : model.layers) out.layers.push_back({l.reconstruct(), l.bias});
  return out;
}

Matrix forward_compressed(const CompressedModel& model, const Matrix& inputs) {
  model.validate();
  if (model.layers.empty()) throw ShapeError("model has no layers");
  if (inputs.cols() != model.arch.inputs()) throw ShapeError("input width does not match architecture");

  Matrix h = inputs;
  const std::size_t count = model.layers.size();
  for (std::size_t li = 0; li < count; ++li) {
    const auto& layer = model.layers[li];
    const auto vals = layer.stored_values();
    Matrix z(h.rows(), layer.rows);
    for (std::size_t s = 0; s < h.rows(); ++s) {
      const auto x = h.row(s);
      auto out = z.row(s);
      for (std::size_t r = 0; r < layer.rows; ++r) {
        float acc = 0.0f;
        if (layer.pattern) {
          const auto& sp = *layer.pattern;
          for (auto p = sp.row_ptr[r]; p < sp.row_ptr[r + 1]; ++p) acc += vals[p] * x[sp.col_idx[p]];
        } else {
          const float* w = vals.data() + r * layer.cols;
          for (std::size_t c = 0; c < layer.cols; ++c) acc += w[c] * x[c];
        }
        out[r] = acc + layer.bias[r];
      }
    }
    if (li + 2 < count) relu_inplace(z.data());
    h = std::move(z);
  }
  softmax_rows(h);
  return h;
}

double accuracy(const CompressedModel& model, const nn::LabeledSet& data) {
  if (data.empty()) throw ArgumentError("accuracy of an empty set");
  return nn::accuracy_from_probabilities(forward_compressed(model, data.inputs), data.labels);
}

}  // namespace tc::compress

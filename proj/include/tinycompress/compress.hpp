#pragma once

// Pruning, weight clustering and quantization of DenseModel weights, plus the
// compressed representation they produce. Biases are carried through every
// transform untouched.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tinycompress/linalg.hpp"
#include "tinycompress/nn.hpp"

namespace tc::compress {

/// Storage tag of a compressed layer. The value is a bit set:
/// 1 = sparse pattern, 2 = clustered, 4 = quantized.
enum class StorageKind : std::uint8_t {
  dense = 0,
  sparse = 1,
  clustered = 2,
  sparse_clustered = 3,
  quantized = 4,
  sparse_quantized = 5,
  clustered_quantized = 6,
  sparse_clustered_quantized = 7,
};

std::string_view to_string(StorageKind kind) noexcept;

/// CSR sparsity pattern: row_ptr has rows + 1 entries, col_idx one per nonzero.
struct SparsePattern {
  std::vector<std::uint32_t> row_ptr;
  std::vector<std::uint16_t> col_idx;

  std::size_t nnz() const noexcept { return col_idx.size(); }

  friend bool operator==(const SparsePattern&, const SparsePattern&) = default;
};

/// Affine integer codes: value = min + code · scale, code ∈ [0, 2^bits).
struct QuantizedBlock {
  unsigned bits = 8;
  float min = 0.0f;
  float scale = 1.0f;
  std::vector<std::uint32_t> codes;

  std::uint32_t max_code() const noexcept { return (bits >= 32) ? 0xFFFFFFFFu : ((1u << bits) - 1u); }
  float dequantize(std::uint32_t code) const noexcept;
  /// Code that represents real 0, i.e. round(-min / scale). May lie outside
  /// the code range when the block does not straddle zero.
  std::int64_t zero_point() const noexcept;

  friend bool operator==(const QuantizedBlock&, const QuantizedBlock&) = default;
};

using Codebook = std::variant<std::vector<float>, QuantizedBlock>;

/// Shared-weight storage: each stored position holds an index into the codebook.
struct ClusteredValues {
  Codebook codebook;
  std::vector<std::uint32_t> indices;

  std::size_t k() const noexcept;
  /// Index width in bits: ceil(log2 k), at least 1.
  unsigned index_bits() const noexcept;
  std::vector<float> centroids() const;

  friend bool operator==(const ClusteredValues&, const ClusteredValues&) = default;
};

using ValueStore = std::variant<std::vector<float>, QuantizedBlock, ClusteredValues>;

struct CompressedLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::optional<SparsePattern> pattern;
  ValueStore values;
  Vector bias;

  StorageKind kind() const noexcept;
  /// Number of stored weight positions: nnz when sparse, rows × cols otherwise.
  std::size_t value_count() const noexcept;
  /// Decoded weight at every stored position. Throws IntegrityError on a
  /// code or index outside its range.
  std::vector<float> stored_values() const;
  Matrix reconstruct() const;
  /// Structural consistency check; throws IntegrityError.
  void validate() const;

  friend bool operator==(const CompressedLayer&, const CompressedLayer&) = default;
};

struct PruneConfig {
  enum class Mode : std::uint8_t { threshold = 0, sparsity = 1 };

  Mode mode = Mode::sparsity;
  /// Absolute-magnitude cutoff (Mode::threshold) or per-layer fraction of
  /// weights to remove (Mode::sparsity).
  double value = 0.805;

  static PruneConfig with_threshold(double threshold) { return {Mode::threshold, threshold}; }
  static PruneConfig with_sparsity(double target_sparsity) { return {Mode::sparsity, target_sparsity}; }

  void validate() const;

  friend bool operator==(const PruneConfig&, const PruneConfig&) = default;
};

struct ClusterConfig {
  /// Codebook size for layers that keep every weight.
  std::size_t clusters = 64;
  /// Codebook size for layers that were pruned first and hold far fewer weights.
  std::size_t clusters_pruned = 16;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  std::size_t finetune_epochs = 10;
  double finetune_learning_rate = 3e-3;
  std::size_t finetune_batch_size = 64;

  void validate() const;
};

struct QuantConfig {
  unsigned bits = 8;

  void validate() const;
};

/// Subset of {prune, cluster, quantize}; stages always run in that order.
struct Pipeline {
  bool prune = false;
  bool cluster = false;
  bool quantize = false;

  /// Accepts any ordering of the letters p, c, q (case-insensitive), e.g. "pcq".
  static Pipeline parse(std::string_view text);
  /// The seven nonempty subsets: P, C, Q, PC, PQ, CQ, PCQ.
  static std::array<Pipeline, 7> all();

  bool empty() const noexcept { return !prune && !cluster && !quantize; }
  std::uint8_t mask() const noexcept;
  static Pipeline from_mask(std::uint8_t mask);
  /// Canonical upper-case name, e.g. "PCQ".
  std::string name() const;

  friend bool operator==(const Pipeline&, const Pipeline&) = default;
};

/// What was applied to produce a CompressedModel. Stored in the model file.
struct PipelineRecord {
  Pipeline stages;
  PruneConfig prune;
  std::uint16_t clusters = 0;
  std::uint16_t clusters_pruned = 0;
  std::uint16_t finetune_epochs = 0;
  std::uint8_t quant_bits = 0;

  friend bool operator==(const PipelineRecord&, const PipelineRecord&) = default;
};

struct CompressedModel {
  nn::Architecture arch;
  std::vector<CompressedLayer> layers;
  PipelineRecord provenance;

  /// Every layer stored dense, no stages recorded.
  static CompressedModel from_dense(const nn::DenseModel& model);

  void validate() const;

  friend bool operator==(const CompressedModel&, const CompressedModel&) = default;
};

// ---- pruning ---------------------------------------------------------------

struct PruneResult {
  CompressedModel model;
  /// Per layer, row-major: 1 where the weight was kept.
  std::vector<std::vector<std::uint8_t>> masks;
};

/// Drops weights with |w| below the threshold (and exact zeros); in sparsity
/// mode drops the floor(s·n) smallest-magnitude weights of every layer, ties
/// going to the lower row-major position. Surviving weights are bit-equal to
/// the originals.
PruneResult prune(const nn::DenseModel& model, const PruneConfig& cfg);

// ---- clustering ------------------------------------------------------------

struct KMeansResult {
  std::vector<float> centroids;
  std::vector<std::uint32_t> assignments;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> objective;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm in one dimension. k is clamped to the number of
/// distinct values; centroids start at evenly spaced quantiles of the
/// distinct values. An emptied cluster is re-seeded at the value farthest
/// from its centroid. Throws DegenerateLayerError on empty input.
KMeansResult kmeans_1d(std::span<const float> values, std::size_t k, std::size_t max_iters);

/// Within-cluster sum of squares of an assignment.
double within_cluster_ss(std::span<const float> values, std::span<const std::uint32_t> assignments,
                         std::span<const float> centroids);

/// Replaces every stored weight by its cluster centroid. Pruned layers cluster
/// only their surviving weights with cfg.clusters_pruned groups.
CompressedModel cluster(const CompressedModel& model, const ClusterConfig& cfg);
CompressedModel cluster(const nn::DenseModel& model, const ClusterConfig& cfg);

/// Sum of `gradients[i]` over the positions i assigned to each cluster.
std::vector<double> group_gradient_sums(std::span<const std::uint32_t> indices, std::span<const float> gradients,
                                        std::size_t k);

/// Loss gradient at every stored position of layer `layer` of `model`,
/// taken from a dense gradient matrix of the same shape.
std::vector<float> stored_position_gradients(const CompressedLayer& layer, const Matrix& dense_gradient);

/// Trains the codebooks of clustered layers: each step back-propagates through
/// the reconstructed model and moves every centroid by -lr × (sum of its
/// members' gradients). Assignments and biases stay fixed.
CompressedModel cluster_finetune(CompressedModel model, const nn::LabeledSet& data, const ClusterConfig& cfg,
                                 double l2_penalty);

// ---- quantization ----------------------------------------------------------

/// scale = (max - min) / (2^bits - 1), or 1 when max == min;
/// code = round((w - min) / scale).
QuantizedBlock quantize_values(std::span<const float> values, unsigned bits);

/// Quantizes stored weights per layer; for clustered layers only the codebook.
CompressedModel quantize(const CompressedModel& model, const QuantConfig& cfg);
CompressedModel quantize(const nn::DenseModel& model, const QuantConfig& cfg);

// ---- pipelines and evaluation ----------------------------------------------

struct PipelineConfigs {
  PruneConfig prune;
  ClusterConfig cluster;
  QuantConfig quantize;
  /// L2 penalty used by cluster fine-tuning.
  double l2_penalty = 1e-4;
};

/// Runs the selected stages in P → C → Q order. `finetune_data` is required
/// when clustering runs with finetune_epochs > 0.
CompressedModel apply_pipeline(const nn::DenseModel& model, Pipeline pipeline, const PipelineConfigs& cfg,
                               const nn::LabeledSet* finetune_data);

nn::DenseModel reconstruct(const CompressedModel& model);

/// Class probabilities computed straight from the compressed storage
/// (CSR traversal, codebook lookup, dequantization) without building dense
/// weight matrices.
Matrix forward_compressed(const CompressedModel& model, const Matrix& inputs);

double accuracy(const CompressedModel& model, const nn::LabeledSet& data);

}  // namespace tc::compress

#pragma once

// The .tcmp container. The encoded length of a model is the toolkit's
// definition of model size. Layout is documented in docs/FORMAT.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tinycompress/compress.hpp"
#include "tinycompress/nn.hpp"

namespace tc::modelfmt {

inline constexpr char kMagic[4] = {'T', 'C', 'M', 'P'};
inline constexpr std::uint16_t kVersion = 1;
/// magic + version + body length.
inline constexpr std::size_t kHeaderBytes = 10;
inline constexpr std::size_t kChecksumBytes = 4;

using Bytes = std::vector<std::uint8_t>;

/// Throws FormatCapacityError if a sparse layer is wider than a 16-bit column
/// index can address.
Bytes encode(const compress::CompressedModel& model);
Bytes encode(const nn::DenseModel& model);

/// Throws DecodeError with a kind naming the failure.
compress::CompressedModel decode(std::span<const std::uint8_t> bytes);

std::size_t size_bytes(const compress::CompressedModel& model);
std::size_t size_bytes(const nn::DenseModel& model);

/// Per-layer view of a model file, for `inspect`.
struct LayerSummary {
  std::size_t index = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  compress::StorageKind kind = compress::StorageKind::dense;
  std::size_t stored_values = 0;  // nnz for sparse layers, rows × cols otherwise
  std::size_t nonzeros = 0;       // nonzero reconstructed weights
  std::size_t codebook_size = 0;  // 0 unless clustered
  unsigned code_bits = 0;         // index bits (clustered) or code bits (quantized); 0 for float storage
  std::size_t record_bytes = 0;   // tag + length + payload + bias
  std::size_t payload_bytes = 0;
  std::size_t bias_bytes = 0;
};

struct FileSummary {
  std::size_t total_bytes = 0;
  std::size_t header_bytes = 0;  // everything except layer records
  compress::PipelineRecord provenance;
  nn::Architecture arch;
  std::vector<LayerSummary> layers;
};

FileSummary summarize(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

compress::CompressedModel load(const std::filesystem::path& path);
void save(const std::filesystem::path& path, const compress::CompressedModel& model);

}  // namespace tc::modelfmt

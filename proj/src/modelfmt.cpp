#include "tinycompress/modelfmt.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "tinycompress/bitpack.hpp"
#include "tinycompress/errors.hpp"

namespace tc {

const char* to_string(DecodeErrorKind kind) noexcept {
  switch (kind) {
    case DecodeErrorKind::bad_magic: return "bad magic";
    case DecodeErrorKind::unsupported_version: return "unsupported version";
    case DecodeErrorKind::truncated: return "truncated";
    case DecodeErrorKind::checksum_mismatch: return "checksum mismatch";
    case DecodeErrorKind::out_of_range: return "out of range";
    case DecodeErrorKind::malformed: return "malformed";
  }
  return "decode error";
}

}  // namespace tc

namespace tc::modelfmt {

using namespace tc::compress;

namespace {

static_assert(std::endian::native == std::endian::little, "encoder assumes a little-endian host");

class Writer {
 public:
  explicit Writer(Bytes& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.insert(out_.end(), buf, buf + sizeof(T));
  }
  void put_floats(std::span<const float> v) {
    for (float f : v) put(f);
  }
  std::size_t size() const { return out_.size(); }
  Bytes& bytes() { return out_; }

 private:
  Bytes& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<float> get_floats(std::size_t n) {
    need(n * sizeof(float));
    std::vector<float> v(n);
    std::memcpy(v.data(), in_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > in_.size() - pos_) throw DecodeError(DecodeErrorKind::truncated, "record extends past end of body");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

[[noreturn]] void malformed(const std::string& what) { throw DecodeError(DecodeErrorKind::malformed, what); }

void write_quant_block(Writer& w, const QuantizedBlock& q) {
  w.put<std::uint8_t>(static_cast<std::uint8_t>(q.bits));
  w.put(q.min);
  w.put(q.scale);
  pack_bits(q.codes, q.bits, w.bytes());
}

QuantizedBlock read_quant_block(Reader& r, std::size_t count) {
  QuantizedBlock q;
  q.bits = r.get<std::uint8_t>();
  if (q.bits < 1 || q.bits > 16) malformed("quantization width " + std::to_string(q.bits) + " outside [1, 16]");
  q.min = r.get<float>();
  q.scale = r.get<float>();
  if (!(q.scale > 0.0f)) malformed("non-positive quantization scale");
  q.codes = unpack_bits(r.take(packed_bytes(count, q.bits)), count, q.bits);
  return q;
}

void write_values(Writer& w, const ValueStore& values) {
  if (const auto* raw = std::get_if<std::vector<float>>(&values)) {
    w.put_floats(*raw);
  } else if (const auto* q = std::get_if<QuantizedBlock>(&values)) {
    write_quant_block(w, *q);
  } else {
    const auto& cv = std::get<ClusteredValues>(values);
    const auto k = cv.k();
    if (k == 0 || k > std::numeric_limits<std::uint16_t>::max())
      throw FormatCapacityError("codebook size must lie in [1, 65535]");
    w.put<std::uint16_t>(static_cast<std::uint16_t>(k));
    if (const auto* cb = std::get_if<std::vector<float>>(&cv.codebook))
      w.put_floats(*cb);
    else
      write_quant_block(w, std::get<QuantizedBlock>(cv.codebook));
    pack_bits(cv.indices, cv.index_bits(), w.bytes());
  }
}

ValueStore read_values(Reader& r, StorageKind kind, std::size_t count) {
  const auto bits = static_cast<std::uint8_t>(kind);
  const bool clustered = bits & 2;
  const bool quantized = bits & 4;
  if (!clustered && !quantized) return r.get_floats(count);
  if (!clustered) return read_quant_block(r, count);

  ClusteredValues cv;
  const std::size_t k = r.get<std::uint16_t>();
  if (k == 0) malformed("empty codebook");
  if (quantized)
    cv.codebook = read_quant_block(r, k);
  else
    cv.codebook = r.get_floats(k);
  const unsigned ib = cv.index_bits();
  cv.indices = unpack_bits(r.take(packed_bytes(count, ib)), count, ib);
  for (auto i : cv.indices)
    if (i >= k) throw DecodeError(DecodeErrorKind::out_of_range, "cluster index " + std::to_string(i) + " >= k");
  return cv;
}

void write_provenance(Writer& w, const PipelineRecord& p) {
  w.put<std::uint8_t>(p.stages.mask());
  if (p.stages.prune) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(p.prune.mode));
    w.put<double>(p.prune.value);
  }
  if (p.stages.cluster) {
    w.put(p.clusters);
    w.put(p.clusters_pruned);
    w.put(p.finetune_epochs);
  }
  if (p.stages.quantize) w.put(p.quant_bits);
}

PipelineRecord read_provenance(Reader& r) {
  PipelineRecord p;
  const auto mask = r.get<std::uint8_t>();
  if (mask > 7) malformed("unknown pipeline stage bits");
  p.stages = Pipeline::from_mask(mask);
  if (p.stages.prune) {
    const auto mode = r.get<std::uint8_t>();
    if (mode > 1) malformed("unknown prune mode");
    p.prune.mode = static_cast<PruneConfig::Mode>(mode);
    p.prune.value = r.get<double>();
  }
  if (p.stages.cluster) {
    p.clusters = r.get<std::uint16_t>();
    p.clusters_pruned = r.get<std::uint16_t>();
    p.finetune_epochs = r.get<std::uint16_t>();
  }
  if (p.stages.quantize) p.quant_bits = r.get<std::uint8_t>();
  return p;
}

std::uint32_t crc_of(std::span<const std::uint8_t> body) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; bodies here are far below 4 GiB.
  crc = crc32(crc, body.data(), static_cast<uInt>(body.size()));
  return static_cast<std::uint32_t>(crc);
}

// Validates framing and checksum; returns the body.
std::span<const std::uint8_t> open_body(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw DecodeError(DecodeErrorKind::truncated, "file shorter than the magic number");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DecodeError(DecodeErrorKind::bad_magic, "not a TCMP file");
  if (bytes.size() < kHeaderBytes) throw DecodeError(DecodeErrorKind::truncated, "file shorter than its header");
  std::uint16_t version;
  std::memcpy(&version, bytes.data() + 4, 2);
  if (version != kVersion)
    throw DecodeError(DecodeErrorKind::unsupported_version, "version " + std::to_string(version));
  std::uint32_t body_len;
  std::memcpy(&body_len, bytes.data() + 6, 4);
  const std::size_t expected = kHeaderBytes + std::size_t{body_len} + kChecksumBytes;
  if (bytes.size() < expected)
    throw DecodeError(DecodeErrorKind::truncated,
                      "expected " + std::to_string(expected) + " bytes, have " + std::to_string(bytes.size()));
  if (bytes.size() > expected) malformed("trailing bytes after checksum");
  const auto body = bytes.subspan(kHeaderBytes, body_len);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + kHeaderBytes + body_len, 4);
  if (stored != crc_of(body)) throw DecodeError(DecodeErrorKind::checksum_mismatch, "CRC-32 does not match body");
  return body;
}

struct ParsedLayer {
  CompressedLayer layer;
  std::size_t record_bytes = 0;
  std::size_t payload_bytes = 0;
};

ParsedLayer read_layer(Reader& r, std::size_t rows, std::size_t cols) {
  const std::size_t start = r.pos();
  const auto tag = r.get<std::uint8_t>();
  if (tag > 7) malformed("unknown storage tag " + std::to_string(tag));
  const auto kind = static_cast<StorageKind>(tag);
  const std::size_t payload_len = r.get<std::uint32_t>();
  const std::size_t payload_start = r.pos();
  if (payload_len > r.remaining()) malformed("layer payload longer than body");

  ParsedLayer out;
  auto& layer = out.layer;
  layer.rows = rows;
  layer.cols = cols;
  std::size_t count = rows * cols;
  if (tag & 1) {
    SparsePattern sp;
    sp.row_ptr.resize(rows + 1);
    for (auto& p : sp.row_ptr) p = r.get<std::uint32_t>();
    if (sp.row_ptr.front() != 0 || !std::is_sorted(sp.row_ptr.begin(), sp.row_ptr.end()))
      malformed("CSR row pointers are not monotone from zero");
    const std::size_t nnz = sp.row_ptr.back();
    if (nnz > rows * cols) malformed("more nonzeros than matrix entries");
    sp.col_idx.resize(nnz);
    for (auto& c : sp.col_idx) {
      c = r.get<std::uint16_t>();
      if (c >= cols) throw DecodeError(DecodeErrorKind::out_of_range, "CSR column index " + std::to_string(c));
    }
    count = nnz;
    layer.pattern = std::move(sp);
  }
  layer.values = read_values(r, kind, count);
  if (r.pos() - payload_start != payload_len) malformed("layer payload length does not match its contents");
  out.payload_bytes = payload_len;
  layer.bias = r.get_floats(rows);
  out.record_bytes = r.pos() - start;
  try {
    layer.validate();
  } catch (const IntegrityError& e) {
    malformed(e.what());
  }
  return out;
}

struct Parsed {
  CompressedModel model;
  std::vector<ParsedLayer> layers;
  std::size_t prefix_bytes = 0;
};

Parsed parse(std::span<const std::uint8_t> bytes) {
  const auto body = open_body(bytes);
  Reader r(body);
  Parsed out;
  auto& model = out.model;
  const std::size_t widths = r.get<std::uint16_t>();
  if (widths == 1) malformed("architecture with a single width");
  model.arch.layer_sizes.resize(widths);
  for (auto& w : model.arch.layer_sizes) {
    w = r.get<std::uint32_t>();
    if (w == 0) malformed("zero layer width");
  }
  model.provenance = read_provenance(r);
  out.prefix_bytes = r.pos();
  for (std::size_t i = 0; i < model.arch.affine_count(); ++i) {
    auto pl = read_layer(r, model.arch.layer_sizes[i + 1], model.arch.layer_sizes[i]);
    model.layers.push_back(pl.layer);
    out.layers.push_back(std::move(pl));
  }
  if (r.remaining() != 0) malformed("unconsumed bytes at end of body");
  return out;
}

}  // namespace

Bytes encode(const CompressedModel& model) {
  model.validate();
  Bytes out(kMagic, kMagic + 4);
  Writer w(out);
  w.put(kVersion);
  w.put<std::uint32_t>(0);  // body length, patched below
  const std::size_t body_start = out.size();

  if (model.arch.layer_sizes.size() > std::numeric_limits<std::uint16_t>::max())
    throw FormatCapacityError("too many layers");
  w.put<std::uint16_t>(static_cast<std::uint16_t>(model.arch.layer_sizes.size()));
  for (auto width : model.arch.layer_sizes) {
    if (width > std::numeric_limits<std::uint32_t>::max()) throw FormatCapacityError("layer width exceeds 32 bits");
    w.put<std::uint32_t>(static_cast<std::uint32_t>(width));
  }
  write_provenance(w, model.provenance);

  for (const auto& layer : model.layers) {
    if (layer.pattern && layer.cols > std::size_t{std::numeric_limits<std::uint16_t>::max()} + 1)
      throw FormatCapacityError("sparse layer width " + std::to_string(layer.cols) +
                                " exceeds 16-bit column index capacity");
    w.put<std::uint8_t>(static_cast<std::uint8_t>(layer.kind()));
    const std::size_t len_at = out.size();
    w.put<std::uint32_t>(0);
    const std::size_t payload_start = out.size();
    if (layer.pattern) {
      for (auto p : layer.pattern->row_ptr) w.put(p);
      for (auto c : layer.pattern->col_idx) w.put(c);
    }
    write_values(w, layer.values);
    const auto payload_len = static_cast<std::uint32_t>(out.size() - payload_start);
    std::memcpy(out.data() + len_at, &payload_len, 4);
    w.put_floats(layer.bias);
  }

  const auto body_len = static_cast<std::uint32_t>(out.size() - body_start);
  std::memcpy(out.data() + 6, &body_len, 4);
  w.put(crc_of(std::span<const std::uint8_t>(out).subspan(body_start)));
  return out;
}

Bytes encode(const nn::DenseModel& model) { return encode(CompressedModel::from_dense(model)); }

CompressedModel decode(std::span<const std::uint8_t> bytes) { return parse(bytes).model; }

std::size_t size_bytes(const CompressedModel& model) { return encode(model).size(); }
std::size_t size_bytes(const nn::DenseModel& model) { return encode(model).size(); }

FileSummary summarize(std::span<const std::uint8_t> bytes) {
  auto parsed = parse(bytes);
  FileSummary s;
  s.total_bytes = bytes.size();
  s.arch = parsed.model.arch;
  s.provenance = parsed.model.provenance;
  std::size_t record_total = 0;
  for (std::size_t i = 0; i < parsed.layers.size(); ++i) {
    const auto& pl = parsed.layers[i];
    const auto& layer = pl.layer;
    LayerSummary ls;
    ls.index = i;
    ls.rows = layer.rows;
    ls.cols = layer.cols;
    ls.kind = layer.kind();
    ls.stored_values = layer.value_count();
    const auto vals = layer.stored_values();
    ls.nonzeros = static_cast<std::size_t>(std::count_if(vals.begin(), vals.end(), [](float v) { return v != 0.0f; }));
    if (const auto* cv = std::get_if<ClusteredValues>(&layer.values)) {
      ls.codebook_size = cv->k();
      ls.code_bits = cv->index_bits();
    } else if (const auto* q = std::get_if<QuantizedBlock>(&layer.values)) {
      ls.code_bits = q->bits;
    }
    ls.record_bytes = pl.record_bytes;
    ls.payload_bytes = pl.payload_bytes;
    ls.bias_bytes = layer.bias.size() * sizeof(float);
    record_total += pl.record_bytes;
    s.layers.push_back(ls);
  }
  s.header_bytes = s.total_bytes - record_total;
  return s;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CompressedModel load(const std::filesystem::path& path) { return decode(read_file(path)); }

void save(const std::filesystem::path& path, const CompressedModel& model) { write_file(path, encode(model)); }

}  // namespace tc::modelfmt

#include <algorithm>
#include <cmath>
#include <string>

#include "tinycompress/compress.hpp"
#include "tinycompress/errors.hpp"

namespace tc::compress {

QuantizedBlock quantize_values(std::span<const float> values, unsigned bits) {
  QuantConfig{bits}.validate();
  QuantizedBlock q;
  q.bits = bits;
  if (values.empty()) return q;

  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  q.min = *lo;
  const double range = static_cast<double>(*hi) - static_cast<double>(*lo);
  q.scale = range > 0.0 ? static_cast<float>(range / static_cast<double>(q.max_code())) : 1.0f;
  // A float32 scale can underflow for a tiny nonzero range.
  if (!(q.scale > 0.0f)) q.scale = 1.0f;

  q.codes.reserve(values.size());
  const double top = q.max_code();
  for (float w : values) {
    const double code = std::round((static_cast<double>(w) - q.min) / q.scale);
    q.codes.push_back(static_cast<std::uint32_t>(std::clamp(code, 0.0, top)));
  }
  return q;
}

CompressedModel quantize(const CompressedModel& model, const QuantConfig& cfg) {
  cfg.validate();
  model.validate();
  CompressedModel out = model;
  for (std::size_t li = 0; li < out.layers.size(); ++li) {
    auto& layer = out.layers[li];
    if (auto* raw = std::get_if<std::vector<float>>(&layer.values)) {
      layer.values = quantize_values(*raw, cfg.bits);
    } else if (auto* cv = std::get_if<ClusteredValues>(&layer.values)) {
      const auto* codebook = std::get_if<std::vector<float>>(&cv->codebook);
      if (!codebook) throw ArgumentError("layer " + std::to_string(li) + " codebook is already quantized");
      cv->codebook = quantize_values(*codebook, cfg.bits);
    } else {
      throw ArgumentError("layer " + std::to_string(li) + " is already quantized");
    }
  }
  out.provenance.stages.quantize = true;
  out.provenance.quant_bits = static_cast<std::uint8_t>(cfg.bits);
  return out;
}

CompressedModel quantize(const nn::DenseModel& model, const QuantConfig& cfg) {
  return quantize(CompressedModel::from_dense(model), cfg);
}

}  // namespace tc::compress

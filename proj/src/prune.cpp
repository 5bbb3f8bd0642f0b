#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tinycompress/compress.hpp"
#include "tinycompress/errors.hpp"

namespace tc::compress {

namespace {

std::vector<std::uint8_t> threshold_mask(std::span<const float> w, double threshold) {
  std::vector<std::uint8_t> keep(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) keep[i] = (w[i] != 0.0f && std::fabs(w[i]) >= threshold) ? 1 : 0;
  return keep;
}

std::vector<std::uint8_t> sparsity_mask(std::span<const float> w, double target) {
  const auto n = w.size();
  const auto drop = static_cast<std::size_t>(std::floor(target * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::fabs(w[a]) < std::fabs(w[b]); });
  std::vector<std::uint8_t> keep(n, 1);
  for (std::size_t i = 0; i < drop; ++i) keep[order[i]] = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] == 0.0f) keep[i] = 0;
  return keep;
}

}  // namespace

PruneResult prune(const nn::DenseModel& model, const PruneConfig& cfg) {
  cfg.validate();
  model.validate();
  PruneResult result;
  result.model.arch = model.arch;
  result.model.provenance.stages.prune = true;
  result.model.provenance.prune = cfg;

  for (const auto& layer : model.layers) {
    const auto& w = layer.weights;
    if (w.cols() > std::numeric_limits<std::uint16_t>::max() + std::size_t{1})
      throw FormatCapacityError("layer width exceeds 16-bit column index capacity");
    auto keep = cfg.mode == PruneConfig::Mode::threshold ? threshold_mask(w.data(), cfg.value)
                                                         : sparsity_mask(w.data(), cfg.value);
    SparsePattern sp;
    sp.row_ptr.reserve(w.rows() + 1);
    sp.row_ptr.push_back(0);
    std::vector<float> values;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        if (keep[r * w.cols() + c]) {
          sp.col_idx.push_back(static_cast<std::uint16_t>(c));
          values.push_back(w(r, c));
        }
      }
      sp.row_ptr.push_back(static_cast<std::uint32_t>(sp.col_idx.size()));
    }
    CompressedLayer cl;
    cl.rows = w.rows();
    cl.cols = w.cols();
    cl.pattern = std::move(sp);
    cl.values = std::move(values);
    cl.bias = layer.bias;
    result.model.layers.push_back(std::move(cl));
    result.masks.push_back(std::move(keep));
  }
  return result;
}

}  // namespace tc::compress

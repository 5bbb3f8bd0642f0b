#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tinycompress/compress.hpp"
#include "tinycompress/errors.hpp"

namespace tc::compress {

namespace {

// Nearest-centroid assignment of ascending `sorted` values. Equidistant values
// go to the smaller centroid; duplicate centroids resolve to the last one.
void assign_sorted(std::span<const double> sorted, std::span<const double> centroids,
                   std::vector<std::uint32_t>& out) {
  const std::size_t k = centroids.size();
  std::vector<std::uint32_t> by_value(k);
  std::iota(by_value.begin(), by_value.end(), 0u);
  std::stable_sort(by_value.begin(), by_value.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return centroids[a] < centroids[b]; });
  std::size_t t = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double v = sorted[i];
    while (t + 1 < k) {
      const double here = centroids[by_value[t]];
      const double next = centroids[by_value[t + 1]];
      if (next != here && std::fabs(v - next) >= std::fabs(v - here)) break;
      ++t;
    }
    out[i] = by_value[t];
  }
}

double objective_of(std::span<const double> sorted, std::span<const std::uint32_t> assign,
                    std::span<const double> centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double d = sorted[i] - centroids[assign[i]];
    total += d * d;
  }
  return total;
}

}  // namespace

KMeansResult kmeans_1d(std::span<const float> values, std::size_t k, std::size_t max_iters) {
  if (values.empty()) throw DegenerateLayerError("cannot cluster an empty set of weights");
  if (k == 0) throw ArgumentError("k must be >= 1");
  const std::size_t n = values.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = values[order[i]];

  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t m = distinct.size();
  k = std::min(k, m);

  std::vector<double> centroids(k);
  for (std::size_t j = 0; j < k; ++j) centroids[j] = distinct[(2 * j + 1) * m / (2 * k)];

  KMeansResult result;
  std::vector<std::uint32_t> assign(n, 0), previous(n, 0);
  std::vector<double> sums(k);
  std::vector<std::size_t> counts(k);
  bool converged = false;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    assign_sorted(sorted, centroids, assign);
    result.objective.push_back(objective_of(sorted, assign, centroids));
    ++result.iterations;
    if (iter > 0 && assign == previous) {
      converged = true;
      break;
    }
    previous = assign;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]] += sorted[i];
      ++counts[assign[i]];
    }
    std::vector<double> dist(n);
    bool any_empty = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0)
        centroids[j] = sums[j] / static_cast<double>(counts[j]);
      else
        any_empty = true;
    }
    if (any_empty) {
      for (std::size_t i = 0; i < n; ++i) dist[i] = std::fabs(sorted[i] - centroids[assign[i]]);
      for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] > 0) continue;
        const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        centroids[j] = sorted[far];
        dist[far] = 0.0;
      }
    }
  }
  if (!converged) {
    assign_sorted(sorted, centroids, assign);
    result.objective.push_back(objective_of(sorted, assign, centroids));
  }

  result.centroids.assign(centroids.begin(), centroids.end());
  result.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.assignments[order[i]] = assign[i];
  return result;
}

double within_cluster_ss(std::span<const float> values, std::span<const std::uint32_t> assignments,
                         std::span<const float> centroids) {
  if (values.size() != assignments.size()) throw ShapeError("values and assignments differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (assignments[i] >= centroids.size()) throw IntegrityError("assignment outside codebook");
    const double d = static_cast<double>(values[i]) - centroids[assignments[i]];
    total += d * d;
  }
  return total;
}

CompressedModel cluster(const CompressedModel& model, const ClusterConfig& cfg) {
  cfg.validate();
  model.validate();
  CompressedModel out = model;
  for (std::size_t li = 0; li < out.layers.size(); ++li) {
    auto& layer = out.layers[li];
    const auto* raw = std::get_if<std::vector<float>>(&layer.values);
    if (!raw) throw ArgumentError("layer " + std::to_string(li) + " is already clustered or quantized");
    if (raw->empty()) throw DegenerateLayerError("layer " + std::to_string(li) + " has no weights left to cluster");
    const std::size_t k = layer.pattern ? cfg.clusters_pruned : cfg.clusters;
    auto km = kmeans_1d(*raw, k, cfg.max_iters);
    layer.values = ClusteredValues{std::move(km.centroids), std::move(km.assignments)};
  }
  out.provenance.stages.cluster = true;
  out.provenance.clusters = static_cast<std::uint16_t>(cfg.clusters);
  out.provenance.clusters_pruned = static_cast<std::uint16_t>(cfg.clusters_pruned);
  return out;
}

CompressedModel cluster(const nn::DenseModel& model, const ClusterConfig& cfg) {
  return cluster(CompressedModel::from_dense(model), cfg);
}

std::vector<double> group_gradient_sums(std::span<const std::uint32_t> indices, std::span<const float> gradients,
                                        std::size_t k) {
  if (indices.size() != gradients.size()) throw ShapeError("indices and gradients differ in length");
  std::vector<double> sums(k, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= k) throw IntegrityError("cluster index outside codebook");
    sums[indices[i]] += gradients[i];
  }
  return sums;
}

std::vector<float> stored_position_gradients(const CompressedLayer& layer, const Matrix& dense_gradient) {
  if (dense_gradient.rows() != layer.rows || dense_gradient.cols() != layer.cols)
    throw ShapeError("gradient shape does not match layer");
  if (!layer.pattern) return std::vector<float>(dense_gradient.data().begin(), dense_gradient.data().end());
  const auto& sp = *layer.pattern;
  std::vector<float> out;
  out.reserve(sp.nnz());
  for (std::size_t r = 0; r < layer.rows; ++r)
    for (auto p = sp.row_ptr[r]; p < sp.row_ptr[r + 1]; ++p) out.push_back(dense_gradient(r, sp.col_idx[p]));
  return out;
}

CompressedModel cluster_finetune(CompressedModel model, const nn::LabeledSet& data, const ClusterConfig& cfg,
                                 double l2_penalty) {
  cfg.validate();
  model.validate();
  bool any = false;
  for (const auto& layer : model.layers) {
    if (const auto* cv = std::get_if<ClusteredValues>(&layer.values)) {
      if (!std::holds_alternative<std::vector<float>>(cv->codebook))
        throw ArgumentError("cannot fine-tune a quantized codebook");
      any = true;
    }
  }
  if (!any) throw ArgumentError("model has no clustered layers to fine-tune");
  if (cfg.finetune_epochs == 0) return model;
  if (data.empty()) throw ArgumentError("fine-tuning set is empty");

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += cfg.finetune_batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.finetune_batch_size);
      const auto idx = std::span<const std::size_t>(order).subspan(start, end - start);
      const auto grads = nn::backward(reconstruct(model), data.subset(idx), l2_penalty);
      for (std::size_t li = 0; li < model.layers.size(); ++li) {
        auto& layer = model.layers[li];
        auto* cv = std::get_if<ClusteredValues>(&layer.values);
        if (!cv) continue;
        auto& codebook = std::get<std::vector<float>>(cv->codebook);
        const auto pos = stored_position_gradients(layer, grads.layers[li].weights);
        const auto sums = group_gradient_sums(cv->indices, pos, codebook.size());
        for (std::size_t j = 0; j < codebook.size(); ++j)
          codebook[j] = static_cast<float>(codebook[j] - cfg.finetune_learning_rate * sums[j]);
      }
    }
  }
  model.provenance.finetune_epochs =
      static_cast<std::uint16_t>(std::min<std::size_t>(65535, model.provenance.finetune_epochs + cfg.finetune_epochs));
  return model;
}

}  // namespace tc::compress

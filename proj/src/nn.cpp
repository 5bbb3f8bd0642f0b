#include "tinycompress/nn.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tinycompress/errors.hpp"
#include "tinycompress/kernels.hpp"

namespace tc::nn {

Architecture Architecture::fault_detector() { return {{52, 64, 256, 128, 256, 128, 64, 2}}; }

std::size_t Architecture::weight_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) n += layer_sizes[i] * layer_sizes[i + 1];
  return n;
}

std::size_t Architecture::parameter_count() const {
  std::size_t n = weight_count();
  for (std::size_t i = 1; i < layer_sizes.size(); ++i) n += layer_sizes[i];
  return n;
}

void Architecture::validate() const {
  if (layer_sizes.size() < 2) throw ArgumentError("architecture needs at least an input and an output width");
  for (auto w : layer_sizes)
    if (w == 0) throw ArgumentError("architecture widths must be positive");
}

DenseModel DenseModel::zeros(const Architecture& arch) {
  arch.validate();
  DenseModel m{arch, {}};
  for (std::size_t i = 0; i < arch.affine_count(); ++i) {
    m.layers.push_back({Matrix(arch.layer_sizes[i + 1], arch.layer_sizes[i]), Vector(arch.layer_sizes[i + 1], 0.0f)});
  }
  return m;
}

DenseModel DenseModel::he_uniform(const Architecture& arch, Rng& rng) {
  DenseModel m = zeros(arch);
  for (auto& layer : m.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    for (auto& w : layer.weights.data()) w = static_cast<float>(rng.uniform(-bound, bound));
  }
  return m;
}

std::size_t DenseModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void DenseModel::validate() const {
  if (layers.size() != arch.affine_count()) throw ShapeError("layer count does not match architecture");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weights.rows() != arch.layer_sizes[i + 1] || l.weights.cols() != arch.layer_sizes[i] ||
        l.bias.size() != arch.layer_sizes[i + 1]) {
      throw ShapeError("layer " + std::to_string(i) + " dimensions do not match architecture");
    }
  }
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> indices) const {
  LabeledSet out{inputs.gather_rows(indices), {}};
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels[i]);
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be > 0");
  if (batch_size == 0) throw ArgumentError("batch_size must be >= 1");
  if (!(l2_penalty >= 0.0)) throw ArgumentError("l2_penalty must be >= 0");
}

namespace {

void check_inputs(const DenseModel& model, const Matrix& inputs) {
  if (model.layers.empty()) throw ShapeError("model has no layers");
  if (inputs.cols() != model.arch.inputs()) {
    throw ShapeError("input width " + std::to_string(inputs.cols()) + " != " + std::to_string(model.arch.inputs()));
  }
}

void check_labels(const DenseModel& model, const LabeledSet& batch) {
  if (batch.inputs.rows() != batch.labels.size()) throw ShapeError("input rows and label count differ");
  const auto classes = static_cast<int>(model.arch.classes());
  for (int y : batch.labels)
    if (y < 0 || y >= classes) throw ArgumentError("label " + std::to_string(y) + " outside class range");
}

bool has_relu(std::size_t layer, std::size_t count) { return layer + 2 < count; }

// z = x · Wᵀ + b for every row of x.
Matrix affine(const DenseLayer& layer, const Matrix& x) {
  const Matrix wt = layer.weights.transposed();
  Matrix z(x.rows(), layer.weights.rows());
  kernels::gemm(x.rows(), z.cols(), x.cols(), x.data(), wt.data(), z.data());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
  }
  return z;
}

// Pre-softmax scores; optionally keeps each layer's input for backprop.
Matrix logits(const DenseModel& model, const Matrix& inputs, std::vector<Matrix>* layer_inputs) {
  Matrix h = inputs;
  const std::size_t count = model.layers.size();
  for (std::size_t i = 0; i < count; ++i) {
    Matrix z = affine(model.layers[i], h);
    if (has_relu(i, count)) relu_inplace(z.data());
    if (layer_inputs) layer_inputs->push_back(std::move(h));
    h = std::move(z);
  }
  return h;
}

double l2_term(const DenseModel& model, double l2_penalty) {
  if (l2_penalty == 0.0) return 0.0;
  double sq = 0.0;
  for (const auto& l : model.layers)
    for (float w : l.weights.data()) sq += static_cast<double>(w) * w;
  return 0.5 * l2_penalty * sq;
}

double row_nll(std::span<const float> scores, int label) {
  double mx = scores[0];
  for (float s : scores) mx = std::max<double>(mx, s);
  double total = 0.0;
  for (float s : scores) total += std::exp(s - mx);
  return -(scores[static_cast<std::size_t>(label)] - mx - std::log(total));
}

}  // namespace

Vector forward(const DenseModel& model, std::span<const float> x) {
  Matrix in(1, x.size(), Vector(x.begin(), x.end()));
  Matrix p = forward_batch(model, in);
  return Vector(p.data().begin(), p.data().end());
}

Matrix forward_batch(const DenseModel& model, const Matrix& inputs) {
  check_inputs(model, inputs);
  Matrix out = logits(model, inputs, nullptr);
  softmax_rows(out);
  return out;
}

double loss(const DenseModel& model, const LabeledSet& batch, double l2_penalty) {
  if (batch.empty()) throw ArgumentError("loss of an empty batch");
  check_inputs(model, batch.inputs);
  check_labels(model, batch);
  const Matrix scores = logits(model, batch.inputs, nullptr);
  double nll = 0.0;
  for (std::size_t r = 0; r < scores.rows(); ++r) nll += row_nll(scores.row(r), batch.labels[r]);
  return nll / static_cast<double>(batch.size()) + l2_term(model, l2_penalty);
}

Gradients backward(const DenseModel& model, const LabeledSet& batch, double l2_penalty) {
  if (batch.empty()) throw ArgumentError("backward on an empty batch");
  check_inputs(model, batch.inputs);
  check_labels(model, batch);

  const std::size_t count = model.layers.size();
  const std::size_t n = batch.size();
  std::vector<Matrix> layer_inputs;
  layer_inputs.reserve(count);
  Matrix delta = logits(model, batch.inputs, &layer_inputs);

  Gradients grads;
  double nll = 0.0;
  for (std::size_t r = 0; r < n; ++r) nll += row_nll(delta.row(r), batch.labels[r]);
  grads.loss = nll / static_cast<double>(n) + l2_term(model, l2_penalty);

  // dL/dlogits = (softmax - onehot) / n
  softmax_rows(delta);
  const float inv_n = 1.0f / static_cast<float>(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = delta.row(r);
    row[static_cast<std::size_t>(batch.labels[r])] -= 1.0f;
    for (auto& v : row) v *= inv_n;
  }

  grads.layers.resize(count);
  for (std::size_t ii = count; ii-- > 0;) {
    const auto& layer = model.layers[ii];
    const Matrix& x = layer_inputs[ii];
    auto& g = grads.layers[ii];

    g.weights = Matrix(layer.weights.rows(), layer.weights.cols());
    kernels::gemm_at_b(delta.cols(), x.cols(), n, delta.data(), x.data(), g.weights.data());
    if (l2_penalty != 0.0) {
      const auto lambda = static_cast<float>(l2_penalty);
      auto gw = g.weights.data();
      auto w = layer.weights.data();
      for (std::size_t j = 0; j < gw.size(); ++j) gw[j] += lambda * w[j];
    }
    g.bias.assign(delta.cols(), 0.0f);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = delta.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) g.bias[j] += row[j];
    }

    if (ii == 0) break;
    Matrix prev(n, layer.weights.cols());
    kernels::gemm(n, prev.cols(), delta.cols(), delta.data(), layer.weights.data(), prev.data());
    // x is the previous layer's post-activation output.
    if (has_relu(ii - 1, count)) {
      auto pd = prev.data();
      auto xd = x.data();
      for (std::size_t j = 0; j < pd.size(); ++j)
        if (xd[j] <= 0.0f) pd[j] = 0.0f;
    }
    delta = std::move(prev);
  }
  return grads;
}

TrainResult train(DenseModel model, const LabeledSet& data, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (data.empty()) throw ArgumentError("training set is empty");
  check_inputs(model, data.inputs);
  check_labels(model, data);

  TrainResult result;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto lr = static_cast<float>(cfg.learning_rate);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const auto idx = std::span<const std::size_t>(order).subspan(start, end - start);
      const Gradients g = backward(model, data.subset(idx), cfg.l2_penalty);
      epoch_loss += g.loss;
      ++batches;
      for (std::size_t i = 0; i < model.layers.size(); ++i) {
        auto w = model.layers[i].weights.data();
        auto gw = g.layers[i].weights.data();
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * gw[j];
        auto& b = model.layers[i].bias;
        for (std::size_t j = 0; j < b.size(); ++j) b[j] -= lr * g.layers[i].bias[j];
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }
  result.model = std::move(model);
  return result;
}

double accuracy_from_probabilities(const Matrix& probabilities, std::span<const int> labels) {
  if (labels.empty()) throw ArgumentError("accuracy of an empty set");
  if (probabilities.rows() != labels.size()) throw ShapeError("prediction rows and label count differ");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (static_cast<int>(argmax(probabilities.row(r))) == labels[r]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

double accuracy(const DenseModel& model, const LabeledSet& data) {
  if (data.empty()) throw ArgumentError("accuracy of an empty set");
  return accuracy_from_probabilities(forward_batch(model, data.inputs), data.labels);
}

}  // namespace tc::nn

#include <algorithm>
#include <cmath>
#include <string>

#include "tinycompress/data.hpp"
#include "tinycompress/errors.hpp"
#include "tinycompress/rng.hpp"

namespace tc::data {

NormalizationStats NormalizationStats::fit(const Matrix& features) {
  NormalizationStats s;
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 1.0);
  if (n == 0) return s;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += features(r, j);
  for (auto& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = features(r, j) - s.mean[j];
      var[j] += dv * dv;
    }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    s.stddev[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

void NormalizationStats::apply(Matrix& features) const {
  if (features.cols() != mean.size()) throw ShapeError("normalization width mismatch");
  for (std::size_t r = 0; r < features.rows(); ++r) {
    auto row = features.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = static_cast<float>((row[j] - mean[j]) / stddev[j]);
  }
}

namespace {

struct Split {
  std::vector<std::size_t> train, test;
};

Split split_class(std::vector<std::size_t> rows, Rng rng, double test_fraction) {
  rng.shuffle(rows.begin(), rows.end());
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
  Split s;
  s.test.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  return s;
}

nn::LabeledSet materialize(const Dataset& ds, const std::vector<std::size_t>& rows, int target,
                           const NormalizationStats* stats) {
  nn::LabeledSet set{ds.features.gather_rows(rows), {}};
  set.labels.reserve(rows.size());
  for (auto r : rows) set.labels.push_back(ds.fault_labels[r] == target ? 1 : 0);
  if (stats) stats->apply(set.inputs);
  return set;
}

}  // namespace

BinaryTask make_binary_task(const Dataset& ds, int fault, std::uint64_t split_seed, double test_fraction,
                            NegativeSet negatives) {
  if (fault < 0 || fault >= kFaultCount) throw TaskError("fault number " + std::to_string(fault) + " out of range");
  if (is_excluded(fault)) throw TaskError("fault " + std::to_string(fault) + " is excluded from detection");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw TaskError("test_fraction must lie in (0, 1)");
  if (ds.features.cols() != kMeasurements) throw TaskError("dataset does not have 52 measurements");

  std::vector<std::size_t> pos, neg;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const int label = ds.fault_labels[r];
    if (is_excluded(label)) continue;
    if (label == fault)
      pos.push_back(r);
    else if (fault == 0 || negatives == NegativeSet::all_other || label == 0)
      neg.push_back(r);
  }
  if (pos.empty()) throw TaskError("no samples of fault " + std::to_string(fault));
  if (neg.empty()) throw TaskError("no negative samples for fault " + std::to_string(fault));

  const Rng root = Rng(split_seed).split(static_cast<std::uint64_t>(fault));
  if (fault == 0 && neg.size() > pos.size()) {
    Rng pick = root.split("negatives");
    pick.shuffle(neg.begin(), neg.end());
    neg.resize(pos.size());
    std::sort(neg.begin(), neg.end());
  }

  const Split ps = split_class(pos, root.split("positive"), test_fraction);
  const Split ns = split_class(neg, root.split("negative"), test_fraction);
  if (ps.train.empty() || ps.test.empty() || ns.train.empty() || ns.test.empty())
    throw TaskError("fault " + std::to_string(fault) + ": too few samples for a train/test split");

  BinaryTask task;
  task.target_fault = fault;
  task.train_indices = ps.train;
  task.train_indices.insert(task.train_indices.end(), ns.train.begin(), ns.train.end());
  task.test_indices = ps.test;
  task.test_indices.insert(task.test_indices.end(), ns.test.begin(), ns.test.end());
  std::sort(task.train_indices.begin(), task.train_indices.end());
  std::sort(task.test_indices.begin(), task.test_indices.end());

  task.stats = NormalizationStats::fit(ds.features.gather_rows(task.train_indices));
  task.train = materialize(ds, task.train_indices, fault, &task.stats);
  task.test = materialize(ds, task.test_indices, fault, &task.stats);
  return task;
}

}  // namespace tc::data

#include <cmath>

#include "tinycompress/bench.hpp"

namespace tc::bench {

double round1(double v) { return std::round(v * 10.0) / 10.0; }

ReportRow compute_metrics(std::size_t baseline_size, double baseline_acc, std::size_t compressed_size,
                          double compressed_acc) {
  ReportRow row;
  row.baseline_size = baseline_size;
  row.baseline_acc = baseline_acc;
  row.compressed_size = compressed_size;
  row.compressed_acc = compressed_acc;
  row.compressed_rate =
      100.0 * (1.0 - static_cast<double>(compressed_size) / static_cast<double>(baseline_size));
  row.acc_change = compressed_acc - baseline_acc;
  return row;
}

void GridReport::aggregate() {
  aggregates.clear();
  complete = true;
  std::vector<compress::Pipeline> order;
  for (const auto& r : rows) {
    if (!r.ok) complete = false;
    bool seen = false;
    for (const auto& p : order) seen = seen || p == r.pipeline;
    if (!seen) order.push_back(r.pipeline);
  }
  // Keep the canonical P, C, Q, PC, PQ, CQ, PCQ order.
  std::vector<compress::Pipeline> sorted;
  for (const auto& p : compress::Pipeline::all())
    for (const auto& q : order)
      if (p == q) sorted.push_back(p);

  for (const auto& p : sorted) {
    PipelineAggregate agg;
    agg.pipeline = p;
    std::vector<const ReportRow*> ok;
    for (const auto& r : rows) {
      if (!(r.pipeline == p)) continue;
      ++agg.cells;
      if (r.ok)
        ok.push_back(&r);
      else
        ++agg.failed;
    }
    if (!ok.empty()) {
      const double n = static_cast<double>(ok.size());
      for (const auto* r : ok) {
        agg.mean_rate += r->compressed_rate;
        agg.mean_acc_change += r->acc_change;
        agg.mean_baseline_acc += r->baseline_acc;
        agg.mean_compressed_acc += r->compressed_acc;
      }
      agg.mean_rate /= n;
      agg.mean_acc_change /= n;
      agg.mean_baseline_acc /= n;
      agg.mean_compressed_acc /= n;
      for (const auto* r : ok) {
        agg.var_rate += (r->compressed_rate - agg.mean_rate) * (r->compressed_rate - agg.mean_rate);
        agg.var_acc_change += (r->acc_change - agg.mean_acc_change) * (r->acc_change - agg.mean_acc_change);
      }
      agg.var_rate /= n;
      agg.var_acc_change /= n;
    }
    aggregates.push_back(agg);
  }
}

const PipelineAggregate* GridReport::find(const compress::Pipeline& p) const {
  for (const auto& a : aggregates)
    if (a.pipeline == p) return &a;
  return nullptr;
}

}  // namespace tc::bench

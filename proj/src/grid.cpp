#include <omp.h>

#include <cstdio>
#include <string>

#include "tinycompress/bench.hpp"
#include "tinycompress/errors.hpp"
#include "tinycompress/modelfmt.hpp"
#include "tinycompress/run_config.hpp"

namespace tc::bench {

std::vector<compress::Pipeline> GridConfig::resolved_pipelines() const {
  if (!pipelines.empty()) return pipelines;
  const auto all = compress::Pipeline::all();
  return {all.begin(), all.end()};
}

std::vector<int> GridConfig::resolved_faults() const { return faults.empty() ? data::included_faults() : faults; }

void GridConfig::validate() const {
  arch.validate();
  if (arch.inputs() != data::kMeasurements) throw ArgumentError("architecture input width must be 52");
  if (arch.classes() != 2) throw ArgumentError("detectors have exactly two outputs");
  train.validate();
  compression.prune.validate();
  compression.cluster.validate();
  compression.quantize.validate();
  if (workers == 0) throw ArgumentError("workers must be >= 1");
  for (int f : resolved_faults())
    if (f < 0 || f >= data::kFaultCount || data::is_excluded(f))
      throw ArgumentError("fault " + std::to_string(f) + " is not a detectable fault");
}

data::Dataset load_dataset(const GridConfig& cfg) {
  if (cfg.data.kind == DataSource::Kind::csv) return data::load_csv(cfg.data.csv_path);
  return data::synth_te(cfg.seed, cfg.data.samples_per_fault);
}

nn::TrainConfig detector_train_config(const GridConfig& cfg, int fault) {
  nn::TrainConfig t = cfg.train;
  t.seed = Rng(cfg.seed).split("train").split(static_cast<std::uint64_t>(fault)).next_u64();
  return t;
}

compress::PipelineConfigs detector_compression_config(const GridConfig& cfg, int fault) {
  compress::PipelineConfigs c = cfg.compression;
  c.cluster.seed = Rng(cfg.seed).split("finetune").split(static_cast<std::uint64_t>(fault)).next_u64();
  c.l2_penalty = cfg.train.l2_penalty;
  return c;
}

std::string baseline_cache_key(const GridConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(config::baseline_identity(cfg).dump())));
  return buf;
}

Detector train_detector(const GridConfig& cfg, const data::Dataset& ds, int fault) {
  Detector det{data::make_binary_task(ds, fault, cfg.seed, cfg.test_fraction, cfg.negatives), {}, {}};

  std::filesystem::path cached;
  if (cfg.cache_dir) {
    cached = *cfg.cache_dir / ("baseline_" + baseline_cache_key(cfg) + "_f" + std::to_string(fault) + ".tcmp");
    if (std::filesystem::exists(cached)) {
      det.model = compress::reconstruct(modelfmt::load(cached));
      return det;
    }
  }

  Rng init = Rng(cfg.seed).split("init").split(static_cast<std::uint64_t>(fault));
  auto trained = nn::train(nn::DenseModel::he_uniform(cfg.arch, init), det.task.train, detector_train_config(cfg, fault));
  det.model = std::move(trained.model);
  det.loss_history = std::move(trained.loss_history);

  if (cfg.cache_dir) {
    std::filesystem::create_directories(*cfg.cache_dir);
    const auto tmp = cached.string() + ".tmp";
    modelfmt::write_file(tmp, modelfmt::encode(det.model));
    std::filesystem::rename(tmp, cached);
  }
  return det;
}

GridReport run_grid(const GridConfig& cfg) {
  cfg.validate();
  const auto ds = load_dataset(cfg);
  const auto faults = cfg.resolved_faults();
  const auto pipelines = cfg.resolved_pipelines();

  std::vector<std::vector<ReportRow>> per_fault(faults.size());
  const auto n = static_cast<std::int64_t>(faults.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(cfg.workers))
  for (std::int64_t fi = 0; fi < n; ++fi) {
    const int fault = faults[static_cast<std::size_t>(fi)];
    auto& rows = per_fault[static_cast<std::size_t>(fi)];

    std::optional<Detector> det;
    std::string baseline_error;
    std::size_t baseline_size = 0;
    double baseline_acc = 0.0;
    try {
      det = train_detector(cfg, ds, fault);
      baseline_size = modelfmt::size_bytes(det->model);
      baseline_acc = nn::accuracy(det->model, det->task.test);
    } catch (const std::exception& e) {
      baseline_error = std::string("baseline: ") + e.what();
      det.reset();
    }

    const auto comp_cfg = detector_compression_config(cfg, fault);
    for (const auto& p : pipelines) {
      ReportRow row;
      if (det) {
        try {
          const auto cm = compress::apply_pipeline(det->model, p, comp_cfg, &det->task.train);
          row = compute_metrics(baseline_size, baseline_acc, modelfmt::size_bytes(cm),
                                compress::accuracy(cm, det->task.test));
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
          row.baseline_size = baseline_size;
          row.baseline_acc = baseline_acc;
        }
      } else {
        row.ok = false;
        row.error = baseline_error;
      }
      row.fault = fault;
      row.pipeline = p;
      rows.push_back(std::move(row));
    }
  }

  GridReport report;
  for (auto& rows : per_fault)
    for (auto& r : rows) report.rows.push_back(std::move(r));
  report.aggregate();
  return report;
}

}  // namespace tc::bench

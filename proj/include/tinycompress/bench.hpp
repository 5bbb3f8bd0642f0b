#pragma once

// Detector training and the compression grid: one baseline per fault, every
// selected pipeline applied to it, and the size / accuracy metrics per cell.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tinycompress/compress.hpp"
#include "tinycompress/data.hpp"
#include "tinycompress/nn.hpp"

namespace tc::bench {

struct DataSource {
  enum class Kind { synth, csv };

  Kind kind = Kind::synth;
  std::filesystem::path csv_path;
  std::size_t samples_per_fault = 1000;
};

/// SGD settings for the fault detectors. Stronger weight decay and a larger
/// step than the nn defaults move the weights well away from their random
/// initialization, so the small ones carry little and magnitude pruning
/// removes little.
inline nn::TrainConfig detector_training() {
  nn::TrainConfig t;
  t.learning_rate = 0.1;
  t.epochs = 60;
  t.l2_penalty = 1e-2;
  return t;
}

struct GridConfig {
  std::uint64_t seed = 42;
  DataSource data;
  double test_fraction = 0.25;
  data::NegativeSet negatives = data::NegativeSet::normal;
  nn::Architecture arch = nn::Architecture::fault_detector();
  nn::TrainConfig train = detector_training();
  compress::PipelineConfigs compression;  // l2_penalty is taken from `train`
  std::vector<compress::Pipeline> pipelines;  // empty means all seven
  std::vector<int> faults;                    // empty means the 18 included faults
  std::size_t workers = 1;
  /// Where trained baselines are cached; unset disables caching.
  std::optional<std::filesystem::path> cache_dir;

  std::vector<compress::Pipeline> resolved_pipelines() const;
  std::vector<int> resolved_faults() const;
  void validate() const;
};

/// One (fault, pipeline) cell.
struct ReportRow {
  int fault = 0;
  compress::Pipeline pipeline;
  std::size_t baseline_size = 0;
  double baseline_acc = 0.0;
  std::size_t compressed_size = 0;
  double compressed_acc = 0.0;
  double compressed_rate = 0.0;  // 100 · (1 − compressed/baseline)
  double acc_change = 0.0;       // compressed_acc − baseline_acc
  bool ok = true;
  std::string error;
};

/// Per-pipeline statistics over successful cells. Variances are population
/// variances.
struct PipelineAggregate {
  compress::Pipeline pipeline;
  std::size_t cells = 0;
  std::size_t failed = 0;
  double mean_rate = 0.0;
  double var_rate = 0.0;
  double mean_acc_change = 0.0;
  double var_acc_change = 0.0;
  double mean_baseline_acc = 0.0;
  double mean_compressed_acc = 0.0;
};

struct GridReport {
  std::vector<ReportRow> rows;  // ordered by (fault, pipeline)
  std::vector<PipelineAggregate> aggregates;
  bool complete = true;

  /// Recomputes `aggregates` and `complete` from `rows`.
  void aggregate();
  const PipelineAggregate* find(const compress::Pipeline& p) const;
};

ReportRow compute_metrics(std::size_t baseline_size, double baseline_acc, std::size_t compressed_size,
                          double compressed_acc);

/// Half-away-from-zero rounding to one decimal, for display.
double round1(double v);

// ---- detectors -------------------------------------------------------------

data::Dataset load_dataset(const GridConfig& cfg);

struct Detector {
  data::BinaryTask task;
  nn::DenseModel model;
  std::vector<double> loss_history;
};

/// Builds the binary task for `fault` and trains (or loads from cache) its
/// baseline detector.
Detector train_detector(const GridConfig& cfg, const data::Dataset& ds, int fault);

/// TrainConfig with the per-fault seed used for baselines.
nn::TrainConfig detector_train_config(const GridConfig& cfg, int fault);

/// Pipeline configs with the per-fault fine-tuning seed.
compress::PipelineConfigs detector_compression_config(const GridConfig& cfg, int fault);

/// Key identifying a baseline: everything that influences its training.
std::string baseline_cache_key(const GridConfig& cfg);

GridReport run_grid(const GridConfig& cfg);

// ---- reports ---------------------------------------------------------------

enum class ReportFormat { csv, markdown, svg };

/// Machine-readable rows of one pipeline (full precision).
void write_pipeline_csv(std::ostream& out, const GridReport& report, const compress::Pipeline& p);
/// Table mirroring the published per-pipeline tables, one decimal, with an Average row.
void write_pipeline_markdown(std::ostream& out, const GridReport& report, const compress::Pipeline& p);
void write_summary_csv(std::ostream& out, const GridReport& report);
/// Two panels: per-fault compressed rate per pipeline, and mean accuracy per pipeline.
void write_summary_svg(std::ostream& out, const GridReport& report);

/// Writes the files for `format` into `dir` and returns their paths:
/// csv → report_<pipeline>.csv + summary.csv, markdown → report_<pipeline>.md,
/// svg → summary.svg. Pipeline names are lower-case in file names.
std::vector<std::filesystem::path> emit_report(const GridReport& report, ReportFormat format,
                                               const std::filesystem::path& dir);

}  // namespace tc::bench

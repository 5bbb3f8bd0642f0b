#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "tinycompress/linalg.hpp"
#include "tinycompress/nn.hpp"

namespace tc::data {

inline constexpr std::size_t kMeasurements = 52;
inline constexpr int kFaultCount = 21;  // 0 (normal operation) through 20

enum class FaultType { none, step, random_variation, slow_drift, sticking, unknown };

std::string_view to_string(FaultType type) noexcept;

struct FaultInfo {
  int number;
  std::string_view process_variable;
  FaultType type;
  /// Faults 3, 9 and 15 leave no observable trace in the measurements.
  bool excluded;
};

/// Tennessee Eastman fault taxonomy, indexed by fault number.
const std::array<FaultInfo, kFaultCount>& fault_catalog() noexcept;
bool is_excluded(int fault) noexcept;
/// The 18 fault numbers kept for detection, ascending: 0 plus 17 faults.
std::vector<int> included_faults();

struct Dataset {
  Matrix features;  // one row per sample, kMeasurements columns
  std::vector<int> fault_labels;
  /// Rows with an excluded fault number dropped while loading.
  std::size_t dropped_excluded = 0;

  std::size_t size() const noexcept { return fault_labels.size(); }
};

/// Reads `meas_1..meas_52,faultNumber` CSV (columns in any order, extra
/// columns ignored). Excluded faults are dropped and counted.
/// Throws ParseError naming the row and column on bad input.
Dataset read_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);

/// Writes the documented schema with a header row. Floats use the shortest
/// round-trip representation.
void write_csv(std::ostream& out, const Dataset& ds);

/// Base process of the surrogate generator: x = mean + loadings · f + noise ⊙ e
/// with f, e standard normal.
struct SurrogateProcess {
  std::vector<double> mean;
  std::vector<double> stddev;  // marginal standard deviation per feature
  Matrix loadings;             // kMeasurements × latent factors
  std::vector<double> noise;
};

/// How one fault perturbs the base process. `magnitude[i]` applies to
/// `features[i]`: a mean shift for step faults, the final shift for drifts,
/// the clamped value for sticking faults and the standard-deviation
/// multiplier for random variation. Unknown faults combine a step on
/// `features` with random variation on `inflated`.
struct FaultSignature {
  int fault = 0;
  FaultType type = FaultType::none;
  std::vector<std::size_t> features;
  std::vector<double> magnitude;
  std::vector<std::size_t> inflated;
  double inflation = 1.0;
};

SurrogateProcess surrogate_process(std::uint64_t seed);
FaultSignature fault_signature(std::uint64_t seed, int fault);

/// Seeded Tennessee-Eastman surrogate: a correlated Gaussian base process and
/// a per-fault signature that follows the fault's type. Produces
/// samples_per_fault rows for each of the 18 included faults.
Dataset synth_te(std::uint64_t seed, std::size_t samples_per_fault);

/// Per-feature z-score parameters.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  static NormalizationStats fit(const Matrix& features);
  void apply(Matrix& features) const;
};

enum class NegativeSet {
  normal,     // fault-0 samples only
  all_other,  // every other included fault
};

/// Fault f (label 1) against negatives (label 0), split into stratified,
/// z-scored train and test sets. Normalization is fit on the train split.
struct BinaryTask {
  int target_fault = 0;
  std::vector<std::size_t> train_indices;  // rows of the source Dataset
  std::vector<std::size_t> test_indices;
  NormalizationStats stats;
  nn::LabeledSet train;
  nn::LabeledSet test;
};

/// For target fault 0 the negatives are the other faults regardless of
/// `negatives`, subsampled to the positive count.
/// Throws TaskError if either class is missing or a split would be empty.
BinaryTask make_binary_task(const Dataset& ds, int fault, std::uint64_t split_seed, double test_fraction,
                            NegativeSet negatives = NegativeSet::normal);

}  // namespace tc::data

#include <gtest/gtest.h>

#include "tinycompress/errors.hpp"
#include "tinycompress/run_config.hpp"

using namespace tc;
using nlohmann::json;

namespace {

std::string failing_field(const json& doc) {
  try {
    config::parse_run_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST(RunConfig, DefaultsMatchLibraryDefaults) {
  const auto cfg = config::parse_run_config(json::object());
  const bench::GridConfig g;
  EXPECT_EQ(cfg.grid.seed, g.seed);
  EXPECT_EQ(cfg.grid.data.samples_per_fault, 1000u);
  EXPECT_EQ(cfg.grid.arch.layer_sizes, nn::Architecture::fault_detector().layer_sizes);
  EXPECT_EQ(cfg.grid.compression.prune, g.compression.prune);
  EXPECT_EQ(cfg.grid.compression.l2_penalty, cfg.grid.train.l2_penalty);
  EXPECT_FALSE(cfg.grid.cache_dir.has_value());
}

TEST(RunConfig, UnknownKeysNameTheDottedField) {
  EXPECT_EQ(failing_field({{"sed", 1}}), "sed");
  EXPECT_EQ(failing_field({{"cluster", {{"k", 4}}}}), "cluster.k");
  EXPECT_EQ(failing_field({{"data", {{"samples", 4}}}}), "data.samples");
}

TEST(RunConfig, TypeAndRangeErrors) {
  EXPECT_EQ(failing_field({{"train", {{"epochs", -1}}}}), "train.epochs");
  EXPECT_EQ(failing_field({{"train", {{"learning_rate", "fast"}}}}), "train.learning_rate");
  EXPECT_EQ(failing_field({{"quantize", {{"bits", 0}}}}), "quantize.bits");
  EXPECT_EQ(failing_field({{"quantize", {{"bits", 17}}}}), "quantize.bits");
  EXPECT_EQ(failing_field({{"data", {{"test_fraction", 1.0}}}}), "data.test_fraction");
  EXPECT_EQ(failing_field({{"data", {{"source", "csv"}}}}), "data.csv_path");
  EXPECT_EQ(failing_field({{"architecture", {52, 10, 3}}}), "architecture");
  EXPECT_EQ(failing_field({{"faults", {1, 9}}}), "faults");
  EXPECT_EQ(failing_field({{"pipelines", {"pxq"}}}), "pipelines");
  EXPECT_EQ(failing_field({{"workers", 0}}), "workers");
  EXPECT_EQ(failing_field({{"prune", {{"target_sparsity", 1.5}}}}), "prune.target_sparsity");
}

TEST(RunConfig, PruneModesAreExclusive) {
  EXPECT_EQ(failing_field({{"prune", {{"threshold", 0.1}, {"target_sparsity", 0.5}}}}), "prune");
  EXPECT_EQ(failing_field({{"prune", json::object()}}), "prune");
  const auto t = config::parse_run_config({{"prune", {{"threshold", 0.05}}}});
  EXPECT_EQ(t.grid.compression.prune, compress::PruneConfig::with_threshold(0.05));
}

TEST(RunConfig, ResolvedJsonRoundTrips) {
  const json doc = {{"seed", 7},
                    {"data", {{"samples_per_fault", 50}, {"negatives", "all_other"}}},
                    {"architecture", {52, 16, 2}},
                    {"train", {{"epochs", 3}, {"l2_penalty", 0.5}}},
                    {"prune", {{"threshold", 0.2}}},
                    {"cluster", {{"clusters", 5}}},
                    {"quantize", {{"bits", 4}}},
                    {"pipelines", {"qp", "c"}},
                    {"faults", {0, 4}},
                    {"output_dir", "somewhere"},
                    {"workers", 2},
                    {"cache_baselines", true}};
  const auto cfg = config::parse_run_config(doc);
  EXPECT_EQ(cfg.grid.compression.l2_penalty, 0.5);
  EXPECT_EQ(cfg.grid.cache_dir, std::filesystem::path("somewhere") / "baselines");
  const auto resolved = config::to_json(cfg);
  EXPECT_EQ(resolved["pipelines"], json({"PQ", "C"}));
  EXPECT_EQ(config::to_json(config::parse_run_config(resolved)), resolved);
}

TEST(RunConfig, SeedFallback) {
  EXPECT_EQ(config::parse_run_config(json::object(), 99).grid.seed, 99u);
  EXPECT_EQ(config::parse_run_config({{"seed", 5}}, 99).grid.seed, 5u);
  EXPECT_EQ(config::parse_run_config(json::object()).grid.seed, bench::GridConfig{}.seed);
}

TEST(RunConfig, ShippedConfigParses) {
  const auto cfg = config::load_run_config(std::string(TC_REPO_DIR) + "/configs/desk.json");
  EXPECT_EQ(cfg.grid.resolved_pipelines().size(), 7u);
  EXPECT_EQ(cfg.grid.resolved_faults().size(), 18u);
  EXPECT_THROW(config::load_run_config("/nonexistent/config.json"), ConfigError);
}

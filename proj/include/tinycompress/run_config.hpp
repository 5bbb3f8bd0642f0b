#pragma once

// JSON run configuration shared by every CLI command. Schema: docs/CONFIG.md.

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "tinycompress/bench.hpp"

namespace tc::config {

struct RunConfig {
  bench::GridConfig grid;
  std::filesystem::path output_dir = "out";
};

/// Validates `doc` against the schema. Unknown keys and wrong types raise
/// ConfigError naming the dotted field. `seed_default` is used when the
/// document has no "seed".
RunConfig parse_run_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_default = std::nullopt);

RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_default = std::nullopt);

/// Fully resolved configuration, every field explicit. Parsing the result
/// yields an equal configuration.
nlohmann::json to_json(const RunConfig& cfg);

/// The subset of the configuration that determines a trained baseline.
nlohmann::json baseline_identity(const bench::GridConfig& grid);

}  // namespace tc::config

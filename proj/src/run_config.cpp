#include "tinycompress/run_config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "tinycompress/errors.hpp"

namespace tc::config {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!names.count(key)) throw ConfigError(join(prefix, key), "unknown key");
}

template <typename T>
T get_number(const json& obj, const std::string& prefix, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(join(prefix, key), "expected a non-negative integer");
  } else {
    if (!v.is_number()) throw ConfigError(join(prefix, key), "expected a number");
  }
  return v.get<T>();
}

std::string get_string(const json& obj, const std::string& prefix, const char* key, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(prefix, key), "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& prefix, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(prefix, key), "expected true or false");
  return v.get<bool>();
}

// Runs a library validate() and rethrows its complaint against `field`.
template <typename F>
void check(const std::string& field, F&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const json& doc, std::optional<std::uint64_t> seed_default) {
  reject_unknown(doc, "",
                 {"seed", "data", "architecture", "train", "prune", "cluster", "quantize", "pipelines", "faults",
                  "output_dir", "workers", "cache_baselines"});
  RunConfig cfg;
  auto& g = cfg.grid;
  g.seed = get_number<std::uint64_t>(doc, "", "seed", seed_default.value_or(g.seed));

  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    reject_unknown(d, "data", {"source", "csv_path", "samples_per_fault", "test_fraction", "negatives"});
    const auto source = get_string(d, "data", "source", "synth");
    if (source == "synth")
      g.data.kind = bench::DataSource::Kind::synth;
    else if (source == "csv")
      g.data.kind = bench::DataSource::Kind::csv;
    else
      throw ConfigError("data.source", "expected \"synth\" or \"csv\"");
    g.data.csv_path = get_string(d, "data", "csv_path", "");
    if (g.data.kind == bench::DataSource::Kind::csv && g.data.csv_path.empty())
      throw ConfigError("data.csv_path", "required when data.source is \"csv\"");
    g.data.samples_per_fault = get_number<std::size_t>(d, "data", "samples_per_fault", g.data.samples_per_fault);
    if (g.data.samples_per_fault == 0) throw ConfigError("data.samples_per_fault", "must be >= 1");
    g.test_fraction = get_number<double>(d, "data", "test_fraction", g.test_fraction);
    if (!(g.test_fraction > 0.0 && g.test_fraction < 1.0))
      throw ConfigError("data.test_fraction", "must lie in (0, 1)");
    const auto neg = get_string(d, "data", "negatives", "normal");
    if (neg == "normal")
      g.negatives = data::NegativeSet::normal;
    else if (neg == "all_other")
      g.negatives = data::NegativeSet::all_other;
    else
      throw ConfigError("data.negatives", "expected \"normal\" or \"all_other\"");
  }

  if (doc.contains("architecture")) {
    const auto& a = doc.at("architecture");
    if (!a.is_array()) throw ConfigError("architecture", "expected an array of layer widths");
    g.arch.layer_sizes.clear();
    for (const auto& w : a) {
      if (!w.is_number_integer() || w.get<std::int64_t>() <= 0)
        throw ConfigError("architecture", "widths must be positive integers");
      g.arch.layer_sizes.push_back(w.get<std::size_t>());
    }
    check("architecture", [&] { g.arch.validate(); });
    if (g.arch.inputs() != data::kMeasurements) throw ConfigError("architecture", "first width must be 52");
    if (g.arch.classes() != 2) throw ConfigError("architecture", "last width must be 2");
  }

  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    reject_unknown(t, "train", {"learning_rate", "batch_size", "epochs", "l2_penalty"});
    g.train.learning_rate = get_number<double>(t, "train", "learning_rate", g.train.learning_rate);
    g.train.batch_size = get_number<std::size_t>(t, "train", "batch_size", g.train.batch_size);
    g.train.epochs = get_number<std::size_t>(t, "train", "epochs", g.train.epochs);
    g.train.l2_penalty = get_number<double>(t, "train", "l2_penalty", g.train.l2_penalty);
    check("train", [&] { g.train.validate(); });
  }
  g.compression.l2_penalty = g.train.l2_penalty;

  if (doc.contains("prune")) {
    const auto& p = doc.at("prune");
    reject_unknown(p, "prune", {"threshold", "target_sparsity"});
    const bool has_t = p.contains("threshold");
    const bool has_s = p.contains("target_sparsity");
    if (has_t == has_s) throw ConfigError("prune", "set exactly one of threshold or target_sparsity");
    g.compression.prune = has_t ? compress::PruneConfig::with_threshold(get_number<double>(p, "prune", "threshold", 0))
                                : compress::PruneConfig::with_sparsity(
                                      get_number<double>(p, "prune", "target_sparsity", 0));
    check(has_t ? "prune.threshold" : "prune.target_sparsity", [&] { g.compression.prune.validate(); });
  }

  if (doc.contains("cluster")) {
    const auto& c = doc.at("cluster");
    reject_unknown(c, "cluster",
                   {"clusters", "clusters_pruned", "max_iters", "finetune_epochs", "finetune_learning_rate",
                    "finetune_batch_size"});
    auto& cc = g.compression.cluster;
    cc.clusters = get_number<std::size_t>(c, "cluster", "clusters", cc.clusters);
    cc.clusters_pruned = get_number<std::size_t>(c, "cluster", "clusters_pruned", cc.clusters_pruned);
    cc.max_iters = get_number<std::size_t>(c, "cluster", "max_iters", cc.max_iters);
    cc.finetune_epochs = get_number<std::size_t>(c, "cluster", "finetune_epochs", cc.finetune_epochs);
    cc.finetune_learning_rate = get_number<double>(c, "cluster", "finetune_learning_rate", cc.finetune_learning_rate);
    cc.finetune_batch_size = get_number<std::size_t>(c, "cluster", "finetune_batch_size", cc.finetune_batch_size);
    check("cluster", [&] { cc.validate(); });
  }

  if (doc.contains("quantize")) {
    const auto& q = doc.at("quantize");
    reject_unknown(q, "quantize", {"bits"});
    g.compression.quantize.bits = get_number<unsigned>(q, "quantize", "bits", g.compression.quantize.bits);
    check("quantize.bits", [&] { g.compression.quantize.validate(); });
  }

  if (doc.contains("pipelines")) {
    const auto& ps = doc.at("pipelines");
    if (!ps.is_array()) throw ConfigError("pipelines", "expected an array of stage strings such as \"pcq\"");
    for (const auto& p : ps) {
      if (!p.is_string()) throw ConfigError("pipelines", "expected strings");
      compress::Pipeline parsed;
      check("pipelines", [&] { parsed = compress::Pipeline::parse(p.get<std::string>()); });
      g.pipelines.push_back(parsed);
    }
    if (g.pipelines.empty()) throw ConfigError("pipelines", "must not be empty");
  }

  if (doc.contains("faults")) {
    const auto& fs = doc.at("faults");
    if (!fs.is_array()) throw ConfigError("faults", "expected an array of fault numbers");
    for (const auto& f : fs) {
      if (!f.is_number_integer()) throw ConfigError("faults", "expected integers");
      const int n = f.get<int>();
      if (n < 0 || n >= data::kFaultCount) throw ConfigError("faults", "fault numbers lie in [0, 20]");
      if (data::is_excluded(n)) throw ConfigError("faults", "fault " + std::to_string(n) + " is excluded");
      g.faults.push_back(n);
    }
    if (g.faults.empty()) throw ConfigError("faults", "must not be empty");
  }

  cfg.output_dir = get_string(doc, "", "output_dir", cfg.output_dir.string());
  g.workers = get_number<std::size_t>(doc, "", "workers", g.workers);
  if (g.workers == 0) throw ConfigError("workers", "must be >= 1");
  if (get_bool(doc, "", "cache_baselines", false)) g.cache_dir = cfg.output_dir / "baselines";
  g.compression.cluster.seed = g.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_default) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(doc, seed_default);
}

json baseline_identity(const bench::GridConfig& g) {
  return {
      {"seed", g.seed},
      {"data",
       {{"source", g.data.kind == bench::DataSource::Kind::synth ? "synth" : "csv"},
        {"csv_path", g.data.csv_path.string()},
        {"samples_per_fault", g.data.samples_per_fault},
        {"test_fraction", g.test_fraction},
        {"negatives", g.negatives == data::NegativeSet::normal ? "normal" : "all_other"}}},
      {"architecture", g.arch.layer_sizes},
      {"train",
       {{"learning_rate", g.train.learning_rate},
        {"batch_size", g.train.batch_size},
        {"epochs", g.train.epochs},
        {"l2_penalty", g.train.l2_penalty}}},
  };
}

json to_json(const RunConfig& cfg) {
  const auto& g = cfg.grid;
  json doc = baseline_identity(g);
  const auto& p = g.compression.prune;
  doc["prune"] = p.mode == compress::PruneConfig::Mode::threshold ? json{{"threshold", p.value}}
                                                                   : json{{"target_sparsity", p.value}};
  const auto& c = g.compression.cluster;
  doc["cluster"] = {{"clusters", c.clusters},
                    {"clusters_pruned", c.clusters_pruned},
                    {"max_iters", c.max_iters},
                    {"finetune_epochs", c.finetune_epochs},
                    {"finetune_learning_rate", c.finetune_learning_rate},
                    {"finetune_batch_size", c.finetune_batch_size}};
  doc["quantize"] = {{"bits", g.compression.quantize.bits}};
  json pipelines = json::array();
  for (const auto& pl : g.resolved_pipelines()) pipelines.push_back(pl.name());
  doc["pipelines"] = pipelines;
  doc["faults"] = g.resolved_faults();
  doc["output_dir"] = cfg.output_dir.string();
  doc["workers"] = g.workers;
  doc["cache_baselines"] = g.cache_dir.has_value();
  return doc;
}

}  // namespace tc::config

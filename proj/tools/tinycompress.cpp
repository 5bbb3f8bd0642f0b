// tinycompress: generate data, train detectors, compress, evaluate, run the
// compression grid and inspect model files.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "tinycompress/bench.hpp"
#include "tinycompress/compress.hpp"
#include "tinycompress/data.hpp"
#include "tinycompress/errors.hpp"
#include "tinycompress/modelfmt.hpp"
#include "tinycompress/run_config.hpp"

namespace fs = std::filesystem;
using namespace tc;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("TINYCOMPRESS_SEED");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw UsageError(std::string("TINYCOMPRESS_SEED: not an unsigned integer: ") + raw);
  return v;
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config, "JSON run configuration (see docs/CONFIG.md)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Overrides the config seed");
}

// Config file (or defaults), then flag overrides. The seed falls back to
// TINYCOMPRESS_SEED when neither the file nor the flag sets it.
config::RunConfig resolve(const CommonOptions& opts) {
  auto cfg = opts.config.empty() ? config::parse_run_config(nlohmann::json::object(), env_seed())
                                 : config::load_run_config(opts.config, env_seed());
  if (opts.seed) {
    cfg.grid.seed = *opts.seed;
    cfg.grid.compression.cluster.seed = *opts.seed;
  }
  return cfg;
}

void echo_config(const config::RunConfig& cfg, const fs::path& dir, const std::string& command) {
  if (!dir.empty()) fs::create_directories(dir);
  std::ofstream out(dir / (command + "_config.json"));
  if (!out) throw std::runtime_error("cannot write " + (dir / (command + "_config.json")).string());
  out << config::to_json(cfg).dump(2) << '\n';
}

void check_fault(int fault) {
  if (fault < 0 || fault >= data::kFaultCount) throw UsageError("--fault: must lie in [0, 20]");
  if (data::is_excluded(fault)) throw UsageError("--fault: fault " + std::to_string(fault) + " is excluded");
}

// ---- synth -----------------------------------------------------------------

struct SynthOptions {
  CommonOptions common;
  std::optional<std::size_t> per_fault;
  std::string out;
};

void cmd_synth(const SynthOptions& o) {
  auto cfg = resolve(o.common);
  if (o.per_fault) cfg.grid.data.samples_per_fault = *o.per_fault;
  const std::size_t per_fault = cfg.grid.data.samples_per_fault;
  const auto ds = data::synth_te(cfg.grid.seed, per_fault);
  const fs::path out = o.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + out.string());
  data::write_csv(file, ds);
  file.close();
  echo_config(cfg, out.parent_path(), "synth");
  std::cout << "wrote " << ds.size() << " samples (" << data::included_faults().size() << " faults x " << per_fault
            << ") to " << out.string() << '\n';
}

// ---- train -----------------------------------------------------------------

struct TrainOptions {
  CommonOptions common;
  int fault = 0;
  std::string out;
};

void cmd_train(const TrainOptions& o) {
  check_fault(o.fault);
  auto cfg = resolve(o.common);
  cfg.grid.cache_dir.reset();
  const auto ds = bench::load_dataset(cfg.grid);
  const auto det = bench::train_detector(cfg.grid, ds, o.fault);
  const fs::path out = o.out.empty() ? cfg.output_dir / ("baseline_f" + std::to_string(o.fault) + ".tcmp") : fs::path(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  modelfmt::write_file(out, modelfmt::encode(det.model));
  echo_config(cfg, out.parent_path(), "train");

  std::printf("fault %d: %zu train / %zu test samples\n", o.fault, det.task.train.size(), det.task.test.size());
  if (!det.loss_history.empty())
    std::printf("loss: %.6f (epoch 1) -> %.6f (epoch %zu)\n", det.loss_history.front(), det.loss_history.back(),
                det.loss_history.size());
  std::printf("train accuracy: %.2f%%\ntest accuracy:  %.2f%%\n", nn::accuracy(det.model, det.task.train),
              nn::accuracy(det.model, det.task.test));
  std::printf("wrote %s (%zu bytes)\n", out.string().c_str(), modelfmt::size_bytes(det.model));
}

// ---- compress --------------------------------------------------------------

struct CompressOptions {
  CommonOptions common;
  std::string model;
  std::string pipeline;
  std::string out;
  std::optional<int> fault;
};

void cmd_compress(const CompressOptions& o) {
  compress::Pipeline pipeline;
  try {
    pipeline = compress::Pipeline::parse(o.pipeline);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--pipeline: ") + e.what());
  }
  if (o.fault) check_fault(*o.fault);
  auto cfg = resolve(o.common);

  const auto original_bytes = modelfmt::read_file(o.model);
  const auto dense = compress::reconstruct(modelfmt::decode(original_bytes));

  auto comp = bench::detector_compression_config(cfg.grid, o.fault.value_or(0));
  std::optional<data::BinaryTask> task;
  if (pipeline.cluster && comp.cluster.finetune_epochs > 0) {
    if (o.fault) {
      task = data::make_binary_task(bench::load_dataset(cfg.grid), *o.fault, cfg.grid.seed, cfg.grid.test_fraction,
                                    cfg.grid.negatives);
    } else {
      std::cerr << "note: no --fault given, cluster fine-tuning skipped\n";
      comp.cluster.finetune_epochs = 0;
    }
  }
  const auto model = compress::apply_pipeline(dense, pipeline, comp, task ? &task->train : nullptr);
  const fs::path out = o.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const auto bytes = modelfmt::encode(model);
  modelfmt::write_file(out, bytes);
  echo_config(cfg, out.parent_path(), "compress");

  const auto base = modelfmt::size_bytes(dense);
  std::printf("pipeline %s: %zu -> %zu bytes, compressed rate %.1f%%\n", pipeline.name().c_str(), base, bytes.size(),
              100.0 * (1.0 - static_cast<double>(bytes.size()) / static_cast<double>(base)));
  std::printf("wrote %s\n", out.string().c_str());
}

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
  CommonOptions common;
  std::string model;
  int fault = 0;
  std::string split = "test";
  std::string out;
};

void cmd_eval(const EvalOptions& o) {
  check_fault(o.fault);
  auto cfg = resolve(o.common);
  const auto model = modelfmt::load(o.model);
  const auto task = data::make_binary_task(bench::load_dataset(cfg.grid), o.fault, cfg.grid.seed,
                                           cfg.grid.test_fraction, cfg.grid.negatives);
  const auto& set = o.split == "train" ? task.train : task.test;
  const double acc = compress::accuracy(model, set);
  std::printf("fault %d %s accuracy: %.2f%% (%zu samples)\n", o.fault, o.split.c_str(), acc, set.size());
  if (!o.out.empty()) {
    const fs::path out = o.out;
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot write " + out.string());
    file << nlohmann::json{{"model", o.model},
                           {"fault", o.fault},
                           {"split", o.split},
                           {"samples", set.size()},
                           {"accuracy", acc},
                           {"size_bytes", modelfmt::size_bytes(model)}}
                .dump(2)
         << '\n';
    echo_config(cfg, out.parent_path(), "eval");
  }
}

// ---- grid ------------------------------------------------------------------

struct GridOptions {
  CommonOptions common;
  std::optional<std::size_t> workers;
  std::string output_dir;
};

void cmd_grid(const GridOptions& o) {
  auto cfg = resolve(o.common);
  if (o.workers) cfg.grid.workers = *o.workers;
  if (!o.output_dir.empty()) {
    const bool cached = cfg.grid.cache_dir.has_value();
    cfg.output_dir = o.output_dir;
    if (cached) cfg.grid.cache_dir = cfg.output_dir / "baselines";
  }
  fs::create_directories(cfg.output_dir);
  echo_config(cfg, cfg.output_dir, "grid");

  const auto report = bench::run_grid(cfg.grid);
  for (auto format : {bench::ReportFormat::csv, bench::ReportFormat::markdown, bench::ReportFormat::svg})
    bench::emit_report(report, format, cfg.output_dir);

  std::printf("%-4s %6s %12s %12s %14s\n", "pipe", "cells", "mean rate", "var rate", "mean acc chg");
  for (const auto& a : report.aggregates)
    std::printf("%-4s %6zu %11.2f%% %12.4f %13.2f\n", a.pipeline.name().c_str(), a.cells - a.failed, a.mean_rate,
                a.var_rate, a.mean_acc_change);
  std::size_t failed = 0;
  for (const auto& r : report.rows)
    if (!r.ok) {
      ++failed;
      std::fprintf(stderr, "failed cell: fault %d %s: %s\n", r.fault, r.pipeline.name().c_str(), r.error.c_str());
    }
  std::printf("%s: %zu cells, %zu failed; reports in %s\n", report.complete ? "complete" : "incomplete",
              report.rows.size(), failed, cfg.output_dir.string().c_str());
}

// ---- inspect ---------------------------------------------------------------

void cmd_inspect(const std::string& path) {
  const auto bytes = modelfmt::read_file(path);
  const auto s = modelfmt::summarize(bytes);
  std::printf("%s: %zu bytes, header %zu bytes\n", path.c_str(), s.total_bytes, s.header_bytes);
  std::printf("architecture:");
  for (std::size_t i = 0; i < s.arch.layer_sizes.size(); ++i)
    std::printf("%s%zu", i ? "-" : " ", s.arch.layer_sizes[i]);
  std::printf("\npipeline: %s\n", s.provenance.stages.empty() ? "none" : s.provenance.stages.name().c_str());
  std::printf("%-5s %-9s %-24s %9s %9s %8s %5s %9s %7s\n", "layer", "shape", "kind", "stored", "nonzero", "codebook",
              "bits", "payload", "bias");
  for (const auto& l : s.layers) {
    const std::string shape = std::to_string(l.rows) + "x" + std::to_string(l.cols);
    std::printf("%-5zu %-9s %-24s %9zu %9zu %8zu %5u %9zu %7zu\n", l.index, shape.c_str(),
                std::string(compress::to_string(l.kind)).c_str(), l.stored_values, l.nonzeros, l.codebook_size,
                l.code_bits, l.payload_bytes, l.bias_bytes);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pruning, clustering and quantization for fault-detection networks"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded surrogate dataset as CSV");
  add_common(synth_cmd, synth.common);
  synth_cmd->add_option("--per-fault", synth.per_fault, "Samples per included fault (default data.samples_per_fault)")->check(CLI::PositiveNumber);
  synth_cmd->add_option("-o,--out", synth.out, "Output CSV path")->required();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train the baseline detector for one fault");
  add_common(train_cmd, train.common);
  train_cmd->add_option("-f,--fault", train.fault, "Target fault number")->required();
  train_cmd->add_option("-o,--out", train.out, "Output model path (default <output_dir>/baseline_f<F>.tcmp)");

  CompressOptions comp;
  auto* comp_cmd = app.add_subcommand("compress", "Apply a compression pipeline to a model file");
  add_common(comp_cmd, comp.common);
  comp_cmd->add_option("-m,--model", comp.model, "Input model")->required()->check(CLI::ExistingFile);
  comp_cmd->add_option("-p,--pipeline", comp.pipeline, "Stages, e.g. p, cq, pcq")->required();
  comp_cmd->add_option("-o,--out", comp.out, "Output model path")->required();
  comp_cmd->add_option("-f,--fault", comp.fault, "Fault whose training split drives cluster fine-tuning");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy of a model on a fault's train or test split");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("-m,--model", eval.model, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-f,--fault", eval.fault, "Target fault number")->required();
  eval_cmd->add_option("--split", eval.split, "train or test")->check(CLI::IsMember({"train", "test"}));
  eval_cmd->add_option("-o,--out", eval.out, "Also write the result as JSON");

  GridOptions grid;
  auto* grid_cmd = app.add_subcommand("grid", "Run every pipeline on every fault and write reports");
  add_common(grid_cmd, grid.common);
  grid_cmd->add_option("-w,--workers", grid.workers, "Faults trained in parallel")->check(CLI::PositiveNumber);
  grid_cmd->add_option("-o,--output-dir", grid.output_dir, "Overrides output_dir");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print the structure and size breakdown of a model file");
  inspect_cmd->add_option("model", inspect_path, "Model file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*synth_cmd) cmd_synth(synth);
    else if (*train_cmd) cmd_train(train);
    else if (*comp_cmd) cmd_compress(comp);
    else if (*eval_cmd) cmd_eval(eval);
    else if (*grid_cmd) cmd_grid(grid);
    else if (*inspect_cmd) cmd_inspect(inspect_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}

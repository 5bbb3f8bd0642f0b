// Acceptance checks, one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "published_tables.hpp"
#include "test_util.hpp"
#include "tinycompress/bench.hpp"
#include "tinycompress/compress.hpp"
#include "tinycompress/errors.hpp"
#include "tinycompress/modelfmt.hpp"
#include "tinycompress/run_config.hpp"

namespace fs = std::filesystem;
using namespace tc;
using namespace tc::compress;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void fail(const std::string& why) {
    pass = false;
    notes.push_back(why);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ---------------------------------------------------------------------

Outcome metric_arithmetic() {
  Outcome o;
  std::size_t rows = 0, bad = 0;
  for (const auto& table : published::kTables)
    for (const auto& r : table.rows) {
      ++rows;
      const auto m = bench::compute_metrics(static_cast<std::size_t>(r.baseline_size), r.baseline_acc,
                                            static_cast<std::size_t>(r.compressed_size), r.compressed_acc);
      const double rate = bench::round1(m.compressed_rate), change = bench::round1(m.acc_change);
      const bool rate_ok = std::abs(rate - r.rate) <= 0.05 + 1e-9;
      const bool change_ok = std::abs(change - r.change) <= 0.05 + 1e-9;
      if (!rate_ok || !change_ok) {
        ++bad;
        o.fail(fmt("%.*s row %d: published rate %.1f change %.1f, computed rate %.2f change %.1f",
                   int(table.pipeline.size()), table.pipeline.data(), r.fault, r.rate, r.change, m.compressed_rate,
                   change));
      }
    }
  o.note(fmt("%zu of %zu published rows reproduce", rows - bad, rows));
  return o;
}

// ---- 2 ---------------------------------------------------------------------

Outcome parameter_count() {
  Outcome o;
  const auto arch = nn::Architecture::fault_detector();
  std::size_t params = 0;
  for (std::size_t i = 0; i + 1 < arch.layer_sizes.size(); ++i)
    params += arch.layer_sizes[i] * arch.layer_sizes[i + 1] + arch.layer_sizes[i + 1];
  if (params != 127234) o.fail(fmt("independent count %zu", params));
  if (arch.parameter_count() != 127234) o.fail(fmt("parameter_count() = %zu", arch.parameter_count()));
  const auto dense = nn::DenseModel::zeros(arch);
  const auto summary = modelfmt::summarize(modelfmt::encode(dense));
  std::size_t payload = 0;
  for (const auto& l : summary.layers) payload += l.payload_bytes + l.bias_bytes;
  if (payload != 508936) o.fail(fmt("dense payload %zu bytes", payload));
  o.note(fmt("%zu parameters, payload %zu bytes, file %zu bytes", params, payload, summary.total_bytes));

  std::ifstream readme(std::string(TC_REPO_DIR) + "/README.md");
  std::stringstream text;
  text << readme.rdbuf();
  if (text.str().find("508,936") == std::string::npos || text.str().find("486.9") == std::string::npos)
    o.fail("README does not document the payload vs published baseline delta");
  return o;
}

// ---- 3, 4, 5 ---------------------------------------------------------------

struct DeskRun {
  config::RunConfig cfg;
  bench::GridReport report;
  double seconds = 0;
};

DeskRun run_desk(const fs::path& work) {
  DeskRun run;
  run.cfg = config::load_run_config(std::string(TC_REPO_DIR) + "/configs/desk.json");
  run.cfg.output_dir = work / "desk";
  fs::remove_all(run.cfg.output_dir);
  run.cfg.grid.cache_dir = run.cfg.output_dir / "baselines";  // empty: every baseline is trained
  const auto t0 = std::chrono::steady_clock::now();
  run.report = bench::run_grid(run.cfg.grid);
  run.seconds = seconds_since(t0);
  for (auto f : {bench::ReportFormat::csv, bench::ReportFormat::markdown, bench::ReportFormat::svg})
    bench::emit_report(run.report, f, run.cfg.output_dir);
  return run;
}

Outcome rate_bands(const DeskRun& run) {
  struct Band {
    const char* pipeline;
    double lo, hi;
  };
  static constexpr Band kBands[] = {{"P", 58, 70},  {"C", 70, 82},  {"Q", 66, 78},  {"PC", 81, 93},
                                    {"PQ", 82, 94}, {"CQ", 76, 88}, {"PCQ", 86, 95}};
  Outcome o;
  if (!run.report.complete) o.fail("grid has failed cells");
  for (const auto& b : kBands) {
    const auto* agg = run.report.find(Pipeline::parse(b.pipeline));
    if (!agg) {
      o.fail(std::string(b.pipeline) + " missing");
      continue;
    }
    const bool in = agg->mean_rate >= b.lo && agg->mean_rate <= b.hi;
    (in ? o.note(fmt("%s %.2f%% in [%g, %g]", b.pipeline, agg->mean_rate, b.lo, b.hi))
        : o.fail(fmt("%s %.2f%% outside [%g, %g]", b.pipeline, agg->mean_rate, b.lo, b.hi)));
  }
  const double minutes = run.seconds / 60.0;
  const auto note = fmt("grid %.1f min with %zu workers on %u hardware threads", minutes, run.cfg.grid.workers,
                        std::thread::hardware_concurrency());
  (minutes < 15.0 ? o.note(note) : o.fail(note + ", limit 15 min"));
  return o;
}

Outcome accuracy_preservation(const DeskRun& run) {
  Outcome o;
  const auto pcq = Pipeline::parse("pcq");
  const auto* agg = run.report.find(pcq);
  if (!agg) {
    o.fail("PCQ missing");
    return o;
  }
  if (agg->mean_acc_change < -5.0) o.fail(fmt("mean change %.2f < -5.0", agg->mean_acc_change));
  double worst = 1e9;
  int worst_fault = -1;
  for (const auto& r : run.report.rows) {
    if (!(r.pipeline == pcq) || !r.ok) continue;
    const double ratio = r.compressed_acc / r.baseline_acc;
    if (ratio < worst) {
      worst = ratio;
      worst_fault = r.fault;
    }
    if (ratio < 0.9) o.fail(fmt("fault %d: %.1f%% vs baseline %.1f%%", r.fault, r.compressed_acc, r.baseline_acc));
  }
  o.note(fmt("mean change %.2f points, worst ratio %.3f (fault %d)", agg->mean_acc_change, worst, worst_fault));
  return o;
}

Outcome ordering(const DeskRun& run) {
  Outcome o;
  const auto rate = [&](const char* p) {
    const auto* a = run.report.find(Pipeline::parse(p));
    return a ? a->mean_rate : std::nan("");
  };
  const double all = rate("PCQ");
  const double best_single = std::max({rate("P"), rate("C"), rate("Q")});
  for (const char* two : {"PC", "PQ", "CQ"}) {
    if (!(all > rate(two))) o.fail(fmt("PCQ %.3f not above %s %.3f", all, two, rate(two)));
    if (!(rate(two) > best_single)) o.fail(fmt("%s %.3f not above best single %.3f", two, rate(two), best_single));
  }
  o.note(fmt("PCQ %.3f > PC %.3f, PQ %.3f, CQ %.3f > best single %.3f", all, rate("PC"), rate("PQ"), rate("CQ"),
             best_single));
  return o;
}

// ---- 6 ---------------------------------------------------------------------

Outcome clustered_gradient() {
  Outcome o;
  Rng rng(606);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testutil::random_model({4, 4, 4, 4}, rng);
    const auto data = testutil::random_set(16, 4, 4, rng);
    ClusterConfig cfg;
    cfg.clusters = 6;
    cfg.finetune_epochs = 1;
    cfg.finetune_learning_rate = 1.0;
    cfg.finetune_batch_size = data.size();
    const auto before = cluster(m, cfg);
    const auto after = cluster_finetune(before, data, cfg, 0.0);
    const auto grads = nn::backward(reconstruct(before), data, 0.0);
    for (std::size_t l = 0; l < before.layers.size(); ++l) {
      const auto& cv = std::get<ClusteredValues>(before.layers[l].values);
      if (cv.k() != 6) o.fail(fmt("layer %zu has %zu clusters", l, cv.k()));
      std::vector<double> brute(cv.k(), 0.0);
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) brute[cv.indices[r * 4 + c]] += grads.layers[l].weights(r, c);
      const auto c0 = cv.centroids();
      const auto c1 = std::get<ClusteredValues>(after.layers[l].values).centroids();
      for (std::size_t j = 0; j < brute.size(); ++j) {
        const double step = double(c0[j]) - double(c1[j]);
        const double rel = std::abs(step - brute[j]) / std::max(std::abs(brute[j]), 1.0);
        worst = std::max(worst, rel);
      }
    }
  }
  (worst <= 1e-5 ? o.note(fmt("worst relative difference %.2e over 20 models", worst))
                 : o.fail(fmt("worst relative difference %.2e", worst)));
  return o;
}

// ---- 7 ---------------------------------------------------------------------

bool gradient_matches_fd(Outcome& o) {
  Rng rng(707);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const auto m = testutil::random_model({2, 3, 2}, rng);
    const auto set = testutil::random_set(8, 2, 2, rng);
    const auto g = nn::backward(m, set, 1e-3);
    for (std::size_t l = 0; l < m.layers.size(); ++l)
      for (std::size_t i = 0; i < m.layers[l].weights.size(); ++i) {
        auto plus = m, minus = m;
        const float w = m.layers[l].weights.data()[i];
        plus.layers[l].weights.data()[i] = w + 1e-3f;
        minus.layers[l].weights.data()[i] = w - 1e-3f;
        const double h = double(plus.layers[l].weights.data()[i]) - double(minus.layers[l].weights.data()[i]);
        const double fd = (testutil::loss_double(plus, set, 1e-3) - testutil::loss_double(minus, set, 1e-3)) / h;
        const double an = g.layers[l].weights.data()[i];
        worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(fd), std::abs(an), 1e-2}));
      }
  }
  o.note(fmt("gradient vs finite differences: worst rel %.1e", worst));
  return worst <= 1e-2;
}

CompressedModel random_of_kind(Rng& rng, std::uint8_t kind) {
  std::vector<std::size_t> sizes{1 + rng.below(10)};
  for (std::size_t i = 0, d = 1 + rng.below(3); i < d; ++i) sizes.push_back(1 + rng.below(10));
  const auto m = testutil::random_model(sizes, rng);
  if (kind == 0) return CompressedModel::from_dense(m);
  PipelineConfigs cfg;
  cfg.prune = PruneConfig::with_sparsity(rng.uniform(0.0, 0.6));
  cfg.cluster.clusters = 1 + rng.below(16);
  cfg.cluster.clusters_pruned = 1 + rng.below(8);
  cfg.cluster.finetune_epochs = 0;
  cfg.quantize.bits = static_cast<unsigned>(1 + rng.below(16));
  return apply_pipeline(m, Pipeline::from_mask(kind), cfg, nullptr);
}

bool round_trips(Outcome& o) {
  Rng rng(708);
  std::size_t n = 0;
  for (std::uint8_t kind = 0; kind < 8; ++kind)
    for (int t = 0; t < 100; ++t, ++n) {
      const auto model = random_of_kind(rng, kind);
      if (static_cast<std::uint8_t>(model.layers[0].kind()) != kind) return false;
      const auto bytes = modelfmt::encode(model);
      const auto back = modelfmt::decode(bytes);
      if (!(back == model) || modelfmt::encode(back) != bytes) return false;
    }
  o.note(fmt("%zu round trips bit-exact", n));
  return true;
}

bool quantization_bound(Outcome& o) {
  Rng rng(709);
  for (unsigned bits = 1; bits <= 16; ++bits)
    for (int t = 0; t < 20; ++t) {
      std::vector<float> v(1 + rng.below(300));
      const double span = std::pow(10.0, rng.uniform(-3, 2));
      for (auto& x : v) x = static_cast<float>(rng.uniform(-span, span));
      const auto q = quantize_values(v, bits);
      const double slack = 4 * std::numeric_limits<float>::epsilon() * span;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(double(q.dequantize(q.codes[i])) - v[i]) > q.scale / 2 + slack) return false;
    }
  o.note("quantization error within scale/2 for 1..16 bits");
  return true;
}

bool prune_semantics(Outcome& o) {
  Rng rng(710);
  for (int t = 0; t < 50; ++t) {
    const auto m = testutil::random_model({8, 7, 3}, rng);
    const double thr = rng.uniform(0.0, 1.0);
    const auto res = prune(m, PruneConfig::with_threshold(thr));
    const auto rec = reconstruct(res.model);
    for (std::size_t l = 0; l < m.layers.size(); ++l)
      for (std::size_t i = 0; i < m.layers[l].weights.size(); ++i) {
        const float w = m.layers[l].weights.data()[i];
        const bool keep = w != 0.0f && std::abs(double(w)) >= thr;
        if (res.masks[l][i] != keep) return false;
        if (rec.layers[l].weights.data()[i] != (keep ? w : 0.0f)) return false;
      }
  }
  o.note("threshold pruning keeps exactly |w| >= t");
  return true;
}

bool fuzz(Outcome& o) {
  Rng rng(711);
  std::size_t flips = 0;
  for (std::uint8_t kind : {0, 1, 3, 6, 7}) {
    const auto bytes = modelfmt::encode(random_of_kind(rng, kind));
    for (std::size_t i = 0; i < bytes.size(); ++i)
      for (int bit = 0; bit < 8; ++bit, ++flips) {
        auto bad = bytes;
        bad[i] ^= static_cast<std::uint8_t>(1u << bit);
        try {
          modelfmt::decode(bad);
          return false;
        } catch (const DecodeError&) {
        }
      }
  }
  o.note(fmt("%zu single-bit flips all rejected", flips));
  return true;
}

Outcome invariants() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::pair<const char*, std::function<bool(Outcome&)>> suites[] = {
      {"finite differences", gradient_matches_fd}, {"round trip", round_trips},
      {"quantization bound", quantization_bound},  {"prune threshold", prune_semantics},
      {"bit-flip fuzz", fuzz}};
  for (const auto& [name, fn] : suites) {
    bool ok = false;
    try {
      ok = fn(o);
    } catch (const std::exception& e) {
      o.note(std::string(name) + ": " + e.what());
    }
    if (!ok) o.fail(std::string(name) + " failed");
  }
  const double s = seconds_since(t0);
  (s < 120 ? o.note(fmt("%.1f s", s)) : o.fail(fmt("%.1f s exceeds 2 min", s)));
  return o;
}

// ---- 8 ---------------------------------------------------------------------

Outcome identity_pipeline(const DeskRun& desk) {
  Outcome o;
  auto g = desk.cfg.grid;  // reuses the cached baselines
  g.pipelines = {Pipeline::parse("p")};
  g.compression.prune = PruneConfig::with_threshold(0.0);
  const auto rep = bench::run_grid(g);
  if (rep.rows.size() != 18) o.fail(fmt("%zu rows", rep.rows.size()));
  for (const auto& r : rep.rows)
    if (!r.ok || r.acc_change != 0.0) o.fail(fmt("fault %d: change %g %s", r.fault, r.acc_change, r.error.c_str()));
  o.note(fmt("%zu faults, every change exactly 0", rep.rows.size()));
  return o;
}

void report(int n, const char* name, const Outcome& o) {
  std::printf("CRITERION %d %s: %s\n", n, o.pass ? "PASS" : "FAIL", name);
  for (const auto& note : o.notes) std::printf("    %s\n", note.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "tinycompress_acceptance";
  std::vector<std::pair<const char*, Outcome>> results(8);
  try {
    results[0] = {"metric arithmetic reproduces published rows", metric_arithmetic()};
    results[1] = {"parameter count and dense payload", parameter_count()};
    results[5] = {"clustered gradient equals summed member gradients", clustered_gradient()};
    results[6] = {"invariant suites", invariants()};
    std::printf("running desk grid (configs/desk.json) in %s ...\n", (work / "desk").c_str());
    std::fflush(stdout);
    const auto desk = run_desk(work);
    results[2] = {"compression rate bands", rate_bands(desk)};
    results[3] = {"PCQ accuracy preservation", accuracy_preservation(desk)};
    results[4] = {"PCQ beats every pair, pairs beat every single technique", ordering(desk)};
    results[7] = {"threshold-0 prune leaves accuracy unchanged", identity_pipeline(desk)};
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  bool all = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    report(static_cast<int>(i + 1), results[i].first, results[i].second);
    all = all && results[i].second.pass;
  }
  return all ? 0 : 1;
}

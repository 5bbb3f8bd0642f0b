#include "tinycompress/compress.hpp"
#include "tinycompress/errors.hpp"

namespace tc::compress {

CompressedModel apply_pipeline(const nn::DenseModel& model, Pipeline pipeline, const PipelineConfigs& cfg,
                               const nn::LabeledSet* finetune_data) {
  if (pipeline.empty()) throw ArgumentError("pipeline must name at least one stage");

  CompressedModel current =
      pipeline.prune ? prune(model, cfg.prune).model : CompressedModel::from_dense(model);
  if (pipeline.cluster) {
    current = cluster(current, cfg.cluster);
    if (cfg.cluster.finetune_epochs > 0) {
      if (!finetune_data) throw ArgumentError("cluster fine-tuning needs training data");
      current = cluster_finetune(std::move(current), *finetune_data, cfg.cluster, cfg.l2_penalty);
    }
  }
  if (pipeline.quantize) current = quantize(current, cfg.quantize);
  return current;
}

}  // namespace tc::compress

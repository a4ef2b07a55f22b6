#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pih2t/checkpoint.hpp"
#include "pih2t/dataset.hpp"
#include "pih2t/loss.hpp"
#include "pih2t/metrics.hpp"
#include "pih2t/model.hpp"

namespace pih2t {

struct TrainConfig {
  Mode mode = Mode::pi_h2t;
  std::size_t stage1_epochs = 30;
  std::size_t stage2_epochs = 10;
  std::size_t batch_size = 128;
  double lr = 0.1;
  double momentum = 0.9;
  // Stage-1 step schedule: lr multiplies by decay_factor at each listed
  // 1-based epoch. Empty means the default {floor(0.8 E1), floor(0.9 E1)}.
  std::vector<std::size_t> decay_epochs;
  double decay_factor = 0.1;
  // Stage-2 rate; negative means 0.1 * lr. Cosine-decayed over E2.
  double stage2_lr = -1.0;
  // Start stage 2 from a fresh classifier instead of the stage-1 weights.
  bool stage2_reset_classifier = false;
  // Compute fusion ratios against the stage-1 classifier instead of the
  // live stage-2 weights.
  bool stage2_freeze_ratio_weights = false;
  // Diagnostic: force every fusion ratio to 1 (pure balanced features);
  // stage 2 then reduces exactly to classifier re-training.
  bool stage2_force_unit_ratio = false;
  std::uint64_t seed = 0;
  PartitionSpec partition;

  void validate() const;
  std::vector<std::size_t> effective_decay_epochs() const;
  double effective_stage2_lr() const;
};

// One metrics row per epoch. Optional fields are written as empty CSV cells
// when absent (fusion stats exist only in stage-2 pi_h2t rows; partition
// accuracies can be undefined on partitions with no test samples).
struct EpochRow {
  int stage = 1;
  std::size_t epoch = 0;  // 1-based within the stage
  double loss = 0.0;
  double train_acc = 0.0;
  MetricsReport test;
  std::optional<double> mean_r;
  std::optional<double> head_fusing_frac;
};

struct TrainOutput {
  Model after_stage1;
  Model final_model;
  std::vector<EpochRow> rows;
  std::string final_rng_state;
};

// Stage 1: representation learning on the instance-sampled long-tailed
// stream (fusion layer active in pi_h2t mode only). Stage 2 (dr_baseline and
// pi_h2t): freeze backbone + fusion layer, re-train the classifier on the
// balanced stream; pi_h2t additionally mixes in instance-branch features via
// the fusion-ratio rule. ce_baseline stops after stage 1.
TrainOutput run_training(const LabeledDataset& train,
                         const LabeledDataset& test,
                         const ClassProfile& train_profile,
                         const BackboneSpec& backbone_spec,
                         const TrainConfig& config,
                         const LossFn& loss = cross_entropy_loss());

// Evaluation under the inference path (no feature mixing; fusion layer
// active when the model carries one).
struct EvalResult {
  MetricsReport metrics;
  std::vector<std::int32_t> predictions;
  std::vector<std::vector<std::size_t>> confusion;  // [label][prediction]
};

EvalResult evaluate(const Model& model, const LabeledDataset& data,
                    const Partition& partition);

void write_metrics_csv(const std::vector<EpochRow>& rows,
                       std::uint64_t config_hash, std::uint64_t seed,
                       const std::filesystem::path& path);

}  // namespace pih2t

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pih2t/analysis.hpp"
#include "pih2t/trainer.hpp"

namespace pih2t {

// Flat key=value run description. `[section]` headers are allowed for
// readability but carry no meaning; keys are globally unique. Unknown keys
// are rejected. The canonical serialization (all keys, resolved values,
// sorted) is hashed into every artifact the run produces.
struct RunConfig {
  Mode mode = Mode::pi_h2t;
  std::uint64_t seed = 0;
  std::string data_dir;

  // training
  std::size_t stage1_epochs = 30;
  std::size_t stage2_epochs = 10;
  std::size_t batch_size = 128;
  double lr = 0.1;
  double momentum = 0.9;
  std::vector<std::size_t> decay_epochs;  // empty = default schedule
  double decay_factor = 0.1;
  double stage2_lr = -1.0;  // negative = 0.1 * lr
  bool stage2_reset_classifier = false;
  bool stage2_freeze_ratio_weights = false;
  bool stage2_force_unit_ratio = false;

  // backbone
  std::string backbone = "mlp";  // mlp | small_cnn
  std::vector<std::size_t> hidden = {64};
  std::size_t feature_dim = 32;
  std::vector<std::size_t> conv_channels = {16, 32, 64};
  std::size_t image_h = 0, image_w = 0, image_c = 0;  // small_cnn input

  // partition thresholds
  std::size_t head_min = 100;
  std::size_t tail_max = 20;

  // synthetic data
  std::string profile = "exponential";  // exponential | pareto
  std::size_t class_count = 10;
  std::size_t base_count = 500;
  double imbalance = 100.0;
  std::size_t pareto_tail = 5;
  double pareto_alpha = 6.0;
  std::size_t dim = 16;
  double mean_separation = 3.0;
  double noise_scale = 1.0;
  std::size_t test_per_class = 100;

  // analysis
  std::size_t oracle_trials = 10000;
  std::vector<std::size_t> oracle_dims = {2, 8, 64};
  std::string projector = "pca2d";  // none | pca2d
  // Boundary class pair; class_b < 0 means "last class".
  long long boundary_class_a = 0;
  long long boundary_class_b = -1;

  ClassProfile build_profile() const;
  PartitionSpec partition_spec() const;
  TrainConfig train_config() const;
  BackboneSpec backbone_spec(std::size_t input_dim) const;
  SynthParams synth_params() const;
  Projector projector_kind() const;

  // Canonical resolved text (sorted key=value lines) and its hash.
  std::string canonical_text() const;
  std::uint64_t hash() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace pih2t

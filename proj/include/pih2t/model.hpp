#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pih2t/backbone.hpp"
#include "pih2t/dataset.hpp"
#include "pih2t/pif.hpp"
#include "pih2t/tensor.hpp"

namespace pih2t {

enum class Mode { ce_baseline, dr_baseline, pi_h2t };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

// Full classification model: backbone -> (fusion layer when enabled) ->
// global average pool -> bias-free linear classifier (row y = class-y
// weights).
struct Model {
  Backbone backbone;
  bool use_pif = false;
  PifParams pif;
  Matrix classifier;  // class_count x feature channels

  std::size_t class_count() const { return classifier.rows; }
  std::size_t feature_dim() const { return classifier.cols; }

  // Feature map after the fusion layer (or the raw backbone map when the
  // fusion layer is disabled).
  FeatureMap feature_map(const float* x) const;
  // Pooled representation fed to the classifier.
  std::vector<double> pooled_feature(const float* x) const;
  std::vector<double> logits_of(const std::vector<double>& f) const;
  std::int32_t predict_one(const float* x) const;
  std::vector<std::int32_t> predict(const LabeledDataset& data) const;
};

Model init_model(const BackboneSpec& spec, std::size_t class_count,
                 bool use_pif, Rng& rng);

}  // namespace pih2t

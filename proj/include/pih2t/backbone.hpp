#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pih2t/rng.hpp"
#include "pih2t/tensor.hpp"

namespace pih2t {

// Desk-scale feature extractors: an MLP for vector data and a three-block
// CNN (3x3 conv + ReLU + 2x2 average pool per block) for small images. Both
// emit an H x W x C feature map consumed by the fusion layer and pooling.
struct BackboneSpec {
  enum class Kind { mlp, small_cnn };
  Kind kind = Kind::mlp;

  // mlp
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden = {64};
  std::size_t feature_dim = 32;

  // small_cnn (input image_h x image_w x image_c; sides divisible by 8)
  std::size_t image_h = 0, image_w = 0, image_c = 0;
  std::vector<std::size_t> conv_channels = {16, 32, 64};

  std::size_t out_height() const;
  std::size_t out_width() const;
  std::size_t out_channels() const;
  std::size_t flat_input_size() const;

  void validate() const;
  std::string serialize() const;
  static BackboneSpec parse(const std::string& text);
};

// Parameter bag shared by layers, gradients, and momentum buffers: weights
// as matrices (rows = output units) plus one bias vector per layer.
struct ParamSet {
  std::vector<Matrix> w;
  std::vector<std::vector<double>> b;

  void scale_to_zero();
  std::size_t count() const;
};

class Backbone {
 public:
  Backbone() = default;
  Backbone(const BackboneSpec& spec, Rng& rng);

  // Per-layer activations retained for the backward pass.
  struct Cache {
    std::vector<double> input;               // mlp flat input
    std::vector<std::vector<double>> pre;    // mlp pre-activations
    std::vector<std::vector<double>> post;   // mlp post-ReLU
    std::vector<FeatureMap> conv_in;         // cnn block inputs
    std::vector<FeatureMap> conv_pre;        // cnn pre-ReLU conv outputs
    std::vector<FeatureMap> conv_post;       // cnn post-ReLU (pool input)
  };

  FeatureMap forward(const float* x, Cache* cache = nullptr) const;
  // Accumulates parameter gradients into `grads` (which must be zero-shaped
  // like params()).
  void backward(const Cache& cache, const FeatureMap& grad_map,
                ParamSet* grads) const;

  ParamSet zero_like() const;
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }
  const BackboneSpec& spec() const { return spec_; }

 private:
  FeatureMap forward_mlp(const float* x, Cache* cache) const;
  FeatureMap forward_cnn(const float* x, Cache* cache) const;
  void backward_mlp(const Cache& cache, const FeatureMap& grad_map,
                    ParamSet* grads) const;
  void backward_cnn(const Cache& cache, const FeatureMap& grad_map,
                    ParamSet* grads) const;

  BackboneSpec spec_;
  ParamSet params_;
};

}  // namespace pih2t

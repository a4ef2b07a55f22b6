#pragma once

#include <cstddef>
#include <vector>

#include "pih2t/tensor.hpp"

namespace pih2t {

// Per-output-channel mixing weights of the fusion layer: out_c depends on the
// residual stack (weight a[c]) and the original stack (weight b[c]). This is
// a kernel-extent-1 channel mix of Concat{F - F_PI, F} with no bias.
struct PifParams {
  std::vector<double> a;  // residual-path weight per channel
  std::vector<double> b;  // identity-path weight per channel

  std::size_t dim() const { return a.size(); }
};

// Identity start: a = 0, b = 1, so the fresh layer passes features through
// unchanged and the induced margin grows from zero during training.
PifParams init_pif_params(std::size_t channel_dim);

// Channel mean per spatial location. Channel values are brought to a
// canonical order and combined with pairwise summation, so the result is
// bitwise identical under any permutation of the channel axis.
// Output shape: height x width x 1.
FeatureMap pi_mean(const FeatureMap& map);

// Float-precision channel mean (plain accumulation, no canonical order).
// Exists to measure the permutation error floor of 32-bit arithmetic; the
// double-precision path above is what the model uses.
std::vector<float> pi_mean_f32(const std::vector<float>& data,
                               std::size_t locations, std::size_t channels);

// out[u,v,c] = a[c] * (map[u,v,c] - pi[u,v]) + b[c] * map[u,v,c]
FeatureMap pif_fuse(const FeatureMap& map, const PifParams& params);

struct PifGradients {
  FeatureMap input;       // dL/d map
  std::vector<double> a;  // dL/d a
  std::vector<double> b;  // dL/d b
};

// Backward pass of pif_fuse for upstream gradient grad_out (same shape as
// the layer output).
PifGradients pif_backward(const FeatureMap& map, const PifParams& params,
                          const FeatureMap& grad_out);

// Global average pool: f[c] = mean over locations of map[., ., c].
std::vector<double> pooled_representation(const FeatureMap& map);

// Backward of pooled_representation: spreads grad_f evenly over locations.
FeatureMap pooled_backward(const FeatureMap& map_shape_like,
                           const std::vector<double>& grad_f);

}  // namespace pih2t

#include "pih2t/pif.hpp"

#include <algorithm>
#include <stdexcept>

namespace pih2t {

namespace {

// Pairwise (divide-and-conquer) summation over a contiguous range.
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 4) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace

PifParams init_pif_params(std::size_t channel_dim) {
  if (channel_dim == 0)
    throw std::invalid_argument("init_pif_params: channel_dim must be >= 1");
  PifParams p;
  p.a.assign(channel_dim, 0.0);
  p.b.assign(channel_dim, 1.0);
  return p;
}

FeatureMap pi_mean(const FeatureMap& map) {
  FeatureMap out(map.height, map.width, 1);
  std::vector<double> scratch(map.channels);
  const double inv_d = 1.0 / static_cast<double>(map.channels);
  for (std::size_t loc = 0; loc < map.locations(); ++loc) {
    const double* row = map.data.data() + loc * map.channels;
    scratch.assign(row, row + map.channels);
    // Sorting fixes the summation order regardless of how the channels were
    // permuted, which is what makes the invariance exact rather than
    // approximate.
    std::sort(scratch.begin(), scratch.end());
    out.data[loc] = pairwise_sum(scratch.data(), scratch.size()) * inv_d;
  }
  return out;
}

std::vector<float> pi_mean_f32(const std::vector<float>& data,
                               std::size_t locations, std::size_t channels) {
  if (data.size() != locations * channels)
    throw std::invalid_argument("pi_mean_f32: size mismatch");
  std::vector<float> out(locations);
  for (std::size_t loc = 0; loc < locations; ++loc) {
    float s = 0.0f;
    const float* row = data.data() + loc * channels;
    for (std::size_t c = 0; c < channels; ++c) s += row[c];
    out[loc] = s / static_cast<float>(channels);
  }
  return out;
}

FeatureMap pif_fuse(const FeatureMap& map, const PifParams& params) {
  if (params.dim() != map.channels || params.b.size() != map.channels)
    throw std::invalid_argument("pif_fuse: params/channel dim mismatch");
  FeatureMap pi = pi_mean(map);
  FeatureMap out(map.height, map.width, map.channels);
  for (std::size_t loc = 0; loc < map.locations(); ++loc) {
    const double m = pi.data[loc];
    const double* x = map.data.data() + loc * map.channels;
    double* y = out.data.data() + loc * map.channels;
    for (std::size_t c = 0; c < map.channels; ++c)
      y[c] = params.a[c] * (x[c] - m) + params.b[c] * x[c];
  }
  return out;
}

PifGradients pif_backward(const FeatureMap& map, const PifParams& params,
                          const FeatureMap& grad_out) {
  map.require_same_shape(grad_out, "pif_backward");
  if (params.dim() != map.channels)
    throw std::invalid_argument("pif_backward: params/channel dim mismatch");

  FeatureMap pi = pi_mean(map);
  PifGradients g;
  g.input = FeatureMap(map.height, map.width, map.channels);
  g.a.assign(map.channels, 0.0);
  g.b.assign(map.channels, 0.0);

  const double inv_d = 1.0 / static_cast<double>(map.channels);
  for (std::size_t loc = 0; loc < map.locations(); ++loc) {
    const double m = pi.data[loc];
    const double* x = map.data.data() + loc * map.channels;
    const double* go = grad_out.data.data() + loc * map.channels;
    double* gx = g.input.data.data() + loc * map.channels;

    // d out[c'] / d x[c] = a[c'] * (delta - 1/d) + b[c'] * delta
    double a_dot_g = 0.0;
    for (std::size_t c = 0; c < map.channels; ++c)
      a_dot_g += params.a[c] * go[c];
    for (std::size_t c = 0; c < map.channels; ++c) {
      gx[c] = go[c] * (params.a[c] + params.b[c]) - inv_d * a_dot_g;
      g.a[c] += go[c] * (x[c] - m);
      g.b[c] += go[c] * x[c];
    }
  }
  return g;
}

std::vector<double> pooled_representation(const FeatureMap& map) {
  std::vector<double> f(map.channels, 0.0);
  const double inv_n = 1.0 / static_cast<double>(map.locations());
  for (std::size_t loc = 0; loc < map.locations(); ++loc) {
    const double* x = map.data.data() + loc * map.channels;
    for (std::size_t c = 0; c < map.channels; ++c) f[c] += x[c];
  }
  for (double& v : f) v *= inv_n;
  return f;
}

FeatureMap pooled_backward(const FeatureMap& map_shape_like,
                           const std::vector<double>& grad_f) {
  if (grad_f.size() != map_shape_like.channels)
    throw std::invalid_argument("pooled_backward: grad dim mismatch");
  FeatureMap g(map_shape_like.height, map_shape_like.width,
               map_shape_like.channels);
  const double inv_n = 1.0 / static_cast<double>(g.locations());
  for (std::size_t loc = 0; loc < g.locations(); ++loc) {
    double* gx = g.data.data() + loc * g.channels;
    for (std::size_t c = 0; c < g.channels; ++c) gx[c] = grad_f[c] * inv_n;
  }
  return g;
}

}  // namespace pih2t

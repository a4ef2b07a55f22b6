#include "pih2t/h2tf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pih2t {

namespace {
constexpr double kDegenerateRange = 1e-12;
}

double cosine_distance(const std::vector<double>& f,
                       const std::vector<double>& w) {
  if (f.size() != w.size())
    throw std::invalid_argument("cosine_distance: dimension mismatch");
  double ff = dot(f.data(), f.data(), f.size());
  double ww = dot(w.data(), w.data(), w.size());
  if (ff <= 0.0 || ww <= 0.0)
    throw std::domain_error("cosine_distance: zero-norm input");
  double c = dot(f.data(), w.data(), f.size()) / std::sqrt(ff * ww);
  return 1.0 - c;
}

std::vector<double> fusion_ratios(
    const std::vector<std::vector<double>>& features,
    const std::vector<std::int32_t>& labels, const Matrix& classifier) {
  if (features.size() != labels.size())
    throw std::invalid_argument("fusion_ratios: feature/label length mismatch");
  if (features.empty())
    throw std::invalid_argument("fusion_ratios: empty batch");

  std::vector<double> d(features.size());
  std::vector<double> w(classifier.cols);
  for (std::size_t j = 0; j < features.size(); ++j) {
    auto y = static_cast<std::size_t>(labels[j]);
    if (y >= classifier.rows)
      throw std::invalid_argument("fusion_ratios: label outside classifier");
    w.assign(classifier.row(y), classifier.row(y) + classifier.cols);
    d[j] = cosine_distance(features[j], w);
  }

  auto [mn_it, mx_it] = std::minmax_element(d.begin(), d.end());
  double mn = *mn_it, mx = *mx_it;
  std::vector<double> r(d.size());
  if (mx - mn <= kDegenerateRange) {
    // Collapsed range: no ordering information, so keep pure balanced
    // features rather than borrowing with an arbitrary weight.
    std::fill(r.begin(), r.end(), 1.0);
    return r;
  }
  double inv_range = 1.0 / (mx - mn);
  for (std::size_t j = 0; j < d.size(); ++j) r[j] = (d[j] - mn) * inv_range;
  return r;
}

std::vector<double> h2tf_fuse(const std::vector<double>& f_target,
                              const std::vector<double>& f_fusing, double r) {
  if (f_target.size() != f_fusing.size())
    throw std::invalid_argument("h2tf_fuse: dimension mismatch");
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("h2tf_fuse: ratio outside [0,1]");
  std::vector<double> out(f_target.size());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = r * f_target[c] + (1.0 - r) * f_fusing[c];
  return out;
}

FusedBatch couple_branches(
    const std::vector<std::vector<double>>& balanced_features,
    const std::vector<std::int32_t>& balanced_labels,
    const std::vector<std::vector<double>>& instance_features,
    const Matrix& classifier) {
  if (balanced_features.size() != instance_features.size())
    throw std::invalid_argument("couple_branches: branch batch length mismatch");
  FusedBatch out;
  out.balanced = balanced_features;
  out.instance = instance_features;
  out.labels = balanced_labels;
  out.ratios = fusion_ratios(balanced_features, balanced_labels, classifier);
  out.fused.resize(balanced_features.size());
  for (std::size_t j = 0; j < balanced_features.size(); ++j)
    out.fused[j] =
        h2tf_fuse(balanced_features[j], instance_features[j], out.ratios[j]);
  return out;
}

}  // namespace pih2t

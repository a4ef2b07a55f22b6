#pragma once

#include <cstdint>
#include <vector>

#include "pih2t/tensor.hpp"

namespace pih2t {

// Paired two-branch batch after fusion. `balanced` rows are the samples whose
// labels are kept; `instance` rows contribute borrowed features. fused[j] =
// r[j] * balanced[j] + (1 - r[j]) * instance[j].
struct FusedBatch {
  std::vector<std::vector<double>> balanced;
  std::vector<std::vector<double>> instance;
  std::vector<double> ratios;
  std::vector<std::vector<double>> fused;
  std::vector<std::int32_t> labels;  // balanced-branch labels only

  std::size_t size() const { return labels.size(); }
};

// 1 - cos(f, w), in [0, 2]. Throws on a zero-norm input.
double cosine_distance(const std::vector<double>& f,
                       const std::vector<double>& w);

// Per-sample ratios from per-batch min-max normalized cosine distances
// between each feature and its own class's classifier row. A batch whose
// distance range collapses (max - min <= 1e-12, including batch size 1)
// falls back to all-ones: pure balanced features, no borrowing.
std::vector<double> fusion_ratios(
    const std::vector<std::vector<double>>& features,
    const std::vector<std::int32_t>& labels, const Matrix& classifier);

// Convex combination r * f_target + (1 - r) * f_fusing.
std::vector<double> h2tf_fuse(const std::vector<double>& f_target,
                              const std::vector<double>& f_fusing, double r);

// Positional pairing of equal-length branch batches. Ratios are computed from
// the balanced-branch features against their label's classifier row; labels
// pass through from the balanced branch only.
FusedBatch couple_branches(const std::vector<std::vector<double>>& balanced_features,
                           const std::vector<std::int32_t>& balanced_labels,
                           const std::vector<std::vector<double>>& instance_features,
                           const Matrix& classifier);

}  // namespace pih2t

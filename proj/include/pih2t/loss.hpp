#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pih2t/profile.hpp"
#include "pih2t/tensor.hpp"

namespace pih2t {

struct LossResult {
  double loss = 0.0;            // mean over the batch
  Matrix grad_logits;           // batch x C, already mean-scaled
  std::vector<std::int32_t> predictions;  // argmax per row
};

// Pluggable training loss. The profile is passed so replacements can reweight
// by class frequency; the shipped cross-entropy ignores it.
using LossFn = std::function<LossResult(
    const Matrix& logits, const std::vector<std::int32_t>& labels,
    const ClassProfile* profile)>;

// Numerically stable softmax cross-entropy with mean reduction.
LossResult cross_entropy(const Matrix& logits,
                         const std::vector<std::int32_t>& labels,
                         const ClassProfile* profile = nullptr);

LossFn cross_entropy_loss();

}  // namespace pih2t

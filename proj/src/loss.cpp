#include "pih2t/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace pih2t {

LossResult cross_entropy(const Matrix& logits,
                         const std::vector<std::int32_t>& labels,
                         const ClassProfile*) {
  if (logits.rows != labels.size())
    throw std::invalid_argument("cross_entropy: batch size mismatch");
  if (logits.cols == 0 || logits.rows == 0)
    throw std::invalid_argument("cross_entropy: empty logits");

  LossResult res;
  res.grad_logits = Matrix(logits.rows, logits.cols);
  res.predictions.resize(logits.rows);
  const double inv_batch = 1.0 / static_cast<double>(logits.rows);

  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* z = logits.row(i);
    auto y = static_cast<std::size_t>(labels[i]);
    if (y >= logits.cols)
      throw std::invalid_argument("cross_entropy: label out of range");

    double zmax = z[0];
    std::size_t arg = 0;
    for (std::size_t c = 1; c < logits.cols; ++c)
      if (z[c] > zmax) {
        zmax = z[c];
        arg = c;
      }
    res.predictions[i] = static_cast<std::int32_t>(arg);

    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) sum += std::exp(z[c] - zmax);
    double lse = zmax + std::log(sum);
    res.loss += (lse - z[y]) * inv_batch;

    double* g = res.grad_logits.row(i);
    for (std::size_t c = 0; c < logits.cols; ++c)
      g[c] = std::exp(z[c] - lse) * inv_batch;
    g[y] -= inv_batch;
  }
  return res;
}

LossFn cross_entropy_loss() {
  return [](const Matrix& logits, const std::vector<std::int32_t>& labels,
            const ClassProfile* profile) {
    return cross_entropy(logits, labels, profile);
  };
}

}  // namespace pih2t

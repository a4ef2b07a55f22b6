#include "pih2t/metrics.hpp"

#include <stdexcept>

namespace pih2t {

MetricsReport partition_metrics(const std::vector<std::int32_t>& predictions,
                                const std::vector<std::int32_t>& labels,
                                const Partition& partition) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("partition_metrics: length mismatch");

  std::size_t correct = 0;
  // per group: {seen, correct}; index 0 head, 1 medium, 2 tail
  std::size_t seen[3] = {0, 0, 0};
  std::size_t hit[3] = {0, 0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto y = static_cast<std::size_t>(labels[i]);
    if (y >= partition.group_of.size())
      throw std::invalid_argument("partition_metrics: label outside partition");
    int g = partition.group_of[y];
    bool ok = predictions[i] == labels[i];
    ++seen[g];
    if (ok) {
      ++hit[g];
      ++correct;
    }
  }

  MetricsReport r;
  r.overall = labels.empty()
                  ? 0.0
                  : static_cast<double>(correct) /
                        static_cast<double>(labels.size());
  auto group_acc = [&](int g) -> std::optional<double> {
    if (seen[g] == 0) return std::nullopt;
    return static_cast<double>(hit[g]) / static_cast<double>(seen[g]);
  };
  r.head = group_acc(0);
  r.medium = group_acc(1);
  r.tail = group_acc(2);
  return r;
}

std::vector<std::vector<std::size_t>> confusion_matrix(
    const std::vector<std::int32_t>& predictions,
    const std::vector<std::int32_t>& labels, std::size_t class_count) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("confusion_matrix: length mismatch");
  std::vector<std::vector<std::size_t>> m(class_count,
                                          std::vector<std::size_t>(class_count, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto y = static_cast<std::size_t>(labels[i]);
    auto p = static_cast<std::size_t>(predictions[i]);
    if (y >= class_count || p >= class_count)
      throw std::invalid_argument("confusion_matrix: class index out of range");
    ++m[y][p];
  }
  return m;
}

std::size_t tail_to_head_errors(const std::vector<std::int32_t>& predictions,
                                const std::vector<std::int32_t>& labels,
                                const Partition& partition) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("tail_to_head_errors: length mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto y = static_cast<std::size_t>(labels[i]);
    auto p = static_cast<std::size_t>(predictions[i]);
    if (partition.group_of[y] == 2 && partition.group_of[p] == 0) ++n;
  }
  return n;
}

}  // namespace pih2t

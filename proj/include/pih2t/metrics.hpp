#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pih2t/profile.hpp"

namespace pih2t {

// Top-1 accuracy overall and restricted to each class group. A group with no
// test samples reports nullopt ("undefined"), never 0 — small runs would
// otherwise drag aggregates down misleadingly.
struct MetricsReport {
  double overall = 0.0;
  std::optional<double> head;
  std::optional<double> medium;
  std::optional<double> tail;
};

MetricsReport partition_metrics(const std::vector<std::int32_t>& predictions,
                                const std::vector<std::int32_t>& labels,
                                const Partition& partition);

// confusion[y][p] = number of samples with true label y predicted as p.
std::vector<std::vector<std::size_t>> confusion_matrix(
    const std::vector<std::int32_t>& predictions,
    const std::vector<std::int32_t>& labels, std::size_t class_count);

// Number of samples whose true class is in the tail group but whose
// prediction lands in the head group.
std::size_t tail_to_head_errors(const std::vector<std::int32_t>& predictions,
                                const std::vector<std::int32_t>& labels,
                                const Partition& partition);

}  // namespace pih2t

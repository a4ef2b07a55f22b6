#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace pih2t {

// Per-class training-set sizes, ordered head-first (counts non-increasing).
struct ClassProfile {
  std::vector<std::size_t> counts;

  std::size_t class_count() const { return counts.size(); }
  std::size_t total() const;
  // max count / min count; 1 when balanced.
  double imbalance_ratio() const;
};

// Geometric decay: count_i = round(base * lambda^i) with lambda chosen so the
// last class lands at base / imbalance. imbalance == 1 gives a flat profile.
ClassProfile exponential_profile(std::size_t base, std::size_t class_count,
                                 double imbalance);

// Power-law decay (1 + i)^(-1/alpha), rescaled linearly so class 0 has
// `base` items and the last class has `tail` items.
ClassProfile pareto_profile(std::size_t base, std::size_t tail,
                            std::size_t class_count, double alpha);

// Head / medium / tail split by absolute count thresholds. A class is head
// when count > head_min, tail when count <= tail_max, medium otherwise.
struct PartitionSpec {
  std::size_t head_min = 100;
  std::size_t tail_max = 20;
};

struct Partition {
  std::vector<std::size_t> head;
  std::vector<std::size_t> medium;
  std::vector<std::size_t> tail;

  // Group id per class: 0 head, 1 medium, 2 tail.
  std::vector<int> group_of;
};

Partition partition_classes(const ClassProfile& profile,
                            const PartitionSpec& spec = {});

// CSV with header `class_index,count`, one row per class.
void save_profile_csv(const ClassProfile& profile,
                      const std::filesystem::path& path);
ClassProfile load_profile_csv(const std::filesystem::path& path);

}  // namespace pih2t

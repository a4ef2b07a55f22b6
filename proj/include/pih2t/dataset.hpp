#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pih2t/profile.hpp"
#include "pih2t/rng.hpp"

namespace pih2t {

enum class BranchKind { balanced, instance };

// In-memory dataset. Inputs are stored as 32-bit floats — the same precision
// as the on-disk format — so save/load round-trips are lossless and synthetic
// generation is reproducible bit-for-bit through the disk.
struct LabeledDataset {
  std::size_t dim = 0;
  std::size_t class_count = 0;
  std::vector<float> inputs;         // size() * dim, row-major
  std::vector<std::int32_t> labels;  // values in [0, class_count)
  std::uint64_t seed = 0;            // seed recorded in the manifest

  std::size_t size() const { return labels.size(); }
  const float* input(std::size_t i) const { return inputs.data() + i * dim; }

  // Counts per label; validates label range.
  ClassProfile profile() const;
  std::vector<std::vector<std::size_t>> indices_by_class() const;
};

struct SynthParams {
  std::size_t dim = 32;
  double mean_separation = 10.0;
  double noise_scale = 1.0;
};

// Gaussian class blobs with long-tailed per-class counts. Class means sit on
// a sphere of radius mean_separation, placed deterministically from `seed`;
// `noise_stream` selects an independent noise sequence (e.g. train vs. test
// split sharing the same class means).
LabeledDataset synth_gaussian_longtail(const ClassProfile& profile,
                                       const SynthParams& params,
                                       std::uint64_t seed,
                                       std::uint64_t noise_stream = 0);

// Deterministic class means used by synth_gaussian_longtail (entry i = mean
// of class i). Exposed for analysis / oracle code.
std::vector<std::vector<double>> gaussian_class_means(std::size_t class_count,
                                                      std::size_t dim,
                                                      double mean_separation,
                                                      std::uint64_t seed);

// Draw `profile.counts[c]` items of each class c from `source` without
// replacement, deterministically from seed.
LabeledDataset subsample_longtail(const LabeledDataset& source,
                                  const ClassProfile& profile,
                                  std::uint64_t seed);

// Per-class draw probabilities: balanced -> 1/C each, instance -> n_i / N.
std::vector<double> branch_probabilities(const ClassProfile& profile,
                                         BranchKind kind);

// Deterministic index stream for one branch. Balanced: class uniform, then
// instance uniform within the class, with replacement. Instance: uniform over
// items (each item's class arrives with probability n_i / N).
class IndexSampler {
 public:
  IndexSampler(const LabeledDataset& dataset, BranchKind kind,
               std::uint64_t seed);

  std::size_t next();
  std::vector<std::size_t> next_batch(std::size_t batch_size);

 private:
  const LabeledDataset* dataset_;
  BranchKind kind_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> by_class_;
};

// Directory layout: manifest.txt (key=value), inputs.f32 (little-endian
// float32, row-major), labels.i32 (little-endian int32).
void save_dataset(const LabeledDataset& dataset,
                  const std::filesystem::path& dir);
LabeledDataset load_dataset(const std::filesystem::path& dir);

}  // namespace pih2t

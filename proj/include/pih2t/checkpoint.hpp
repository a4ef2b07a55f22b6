#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pih2t/model.hpp"

namespace pih2t {

struct CheckpointMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint32_t stage = 0;  // 1 or 2
  std::uint32_t epoch = 0;  // completed epochs within the stage
  Mode mode = Mode::pi_h2t;
  std::string rng_state;
};

struct LoadedCheckpoint {
  Model model;
  CheckpointMeta meta;
};

// Binary container. Layout (all integers and floats little-endian):
//   magic "PIH2TCKP" | u32 version | u64 config_hash | u64 seed |
//   u32 stage | u32 epoch | u32 mode | u32 use_pif |
//   string backbone_spec | string rng_state |
//   u32 block_count | blocks
// string: u32 length + raw bytes. block: string name | u32 ndim |
// u64 dims[ndim] | f64 values[prod(dims)].
// Blocks: backbone.w<i> / backbone.b<i> per layer, pif.ab (shape {2, d}:
// d residual weights then d identity weights), classifier.w (shape {C, d}).
// The file is written to a temp name and renamed into place.
void save_checkpoint(const Model& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pih2t

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pih2t/run_config.hpp"

namespace pih2t {

// Command layer used by the CLI binary (and callable in-process from tests).
// Each command writes its artifacts under `out` and prints a short summary
// to stdout. Errors are reported by exception: ConfigError for bad input,
// anything else for runtime failures.

// Writes out/train/, out/test/ (balanced, same class means, fresh noise),
// out/profile.csv, and out/config.txt.
void cmd_synth(const RunConfig& config, const std::filesystem::path& out);

// Trains per config.mode on config.data_dir; writes out/config.txt,
// out/metrics.csv, out/checkpoint_stage1.bin and, when stage 2 runs,
// out/checkpoint_stage2.bin.
void cmd_train(const RunConfig& config, const std::filesystem::path& out);

// Evaluates a checkpoint on a dataset directory; writes out/eval.json and
// prints the report. The partition comes from profile_csv when given,
// otherwise from the evaluated dataset's own counts.
void cmd_eval(const std::filesystem::path& checkpoint,
              const std::filesystem::path& data_dir,
              const std::optional<std::filesystem::path>& profile_csv,
              const std::filesystem::path& out);

// which: margin | forces | oracles | embeddings | boundary.
// `checkpoint` may be empty for `oracles` (pure random-tuple checks).
void cmd_analyze(const RunConfig& config, const std::string& which,
                 const std::filesystem::path& checkpoint,
                 const std::filesystem::path& data_dir,
                 const std::optional<std::filesystem::path>& profile_csv,
                 const std::filesystem::path& out);

// Worker cap for oracle sharding: PIH2T_THREADS, default 1.
std::size_t configured_threads();

}  // namespace pih2t

// pih2t command-line tool: synthesize long-tailed datasets, run two-stage
// training, evaluate checkpoints, and produce analysis reports.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pih2t/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"long-tailed classification: permutation-invariant feature "
               "fusion + head-to-tail classifier calibration"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "run_out";
  std::optional<std::uint64_t> seed_override;

  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--seed", seed_override,
                 "seed override (takes precedence over the config file)");
  app.add_option("--out", out_dir, "output directory");

  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic long-tailed dataset (train/test)");
  CLI::App* train = app.add_subcommand(
      "train", "run two-stage training per the configured mode");
  synth->fallthrough();
  train->fallthrough();

  std::string checkpoint_path, data_path, profile_path, which = "margin";
  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate a checkpoint on a dataset directory");
  eval->fallthrough();
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  eval->add_option("--data", data_path, "dataset directory")->required();
  eval->add_option("--profile", profile_path,
                   "training profile CSV used for the head/medium/tail "
                   "partition (defaults to the dataset's own counts)");

  CLI::App* analyze = app.add_subcommand(
      "analyze", "produce analysis reports from a checkpoint");
  analyze->fallthrough();
  analyze->add_option("--checkpoint", checkpoint_path,
                      "checkpoint file (not needed for --which oracles)");
  analyze->add_option("--data", data_path, "dataset directory");
  analyze->add_option("--profile", profile_path,
                      "training profile CSV for the partition");
  analyze
      ->add_option("--which", which,
                   "report: margin | forces | oracles | embeddings | boundary")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    pih2t::RunConfig config;
    if (!config_path.empty())
      config = pih2t::load_run_config(config_path);
    else if (synth->parsed() || train->parsed())
      throw pih2t::ConfigError("--config is required for this command");
    if (seed_override) config.seed = *seed_override;

    std::optional<fs::path> profile_opt;
    if (!profile_path.empty()) profile_opt = fs::path(profile_path);

    if (synth->parsed()) {
      pih2t::cmd_synth(config, out_dir);
    } else if (train->parsed()) {
      pih2t::cmd_train(config, out_dir);
    } else if (eval->parsed()) {
      pih2t::cmd_eval(checkpoint_path, data_path, profile_opt, out_dir);
    } else if (analyze->parsed()) {
      if (which != "oracles" && data_path.empty())
        throw pih2t::ConfigError("analyze: --data is required");
      pih2t::cmd_analyze(config, which, checkpoint_path, data_path,
                         profile_opt, out_dir);
    }
  } catch (const pih2t::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

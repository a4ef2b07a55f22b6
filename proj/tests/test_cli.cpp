// End-to-end checks of the installed command-line binary. The test runner
// sets PIH2T_CLI_PATH to the built executable.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("PIH2T_CLI_PATH"); }

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string("\"") + cli_path() + "\" " + args + " > \"" +
                    log.string() + "\" 2>&1";
  int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return (status >> 8) & 0xff;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("cli end-to-end: synth, train, eval, analyze") {
  if (!cli_path()) {
    MESSAGE("PIH2T_CLI_PATH not set; skipping CLI test");
    return;
  }
  fs::path dir = fs::temp_directory_path() / "pih2t_test_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path log = dir / "log.txt";

  fs::path cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "mode = pi_h2t\n"
        << "seed = 5\n"
        << "data_dir = " << (dir / "data").string() << "\n"
        << "class_count = 4\n"
        << "base_count = 40\n"
        << "imbalance = 10\n"
        << "dim = 6\n"
        << "mean_separation = 8\n"
        << "noise_scale = 0.6\n"
        << "test_per_class = 15\n"
        << "stage1_epochs = 2\n"
        << "stage2_epochs = 1\n"
        << "batch_size = 32\n"
        << "hidden = 16\n"
        << "feature_dim = 8\n"
        << "head_min = 30\n"
        << "tail_max = 8\n"
        << "oracle_trials = 200\n"
        << "oracle_dims = 2\n";
  }

  // synth
  REQUIRE(run_cli("synth --config \"" + cfg.string() + "\" --out \"" +
                      (dir / "data").string() + "\"",
                  log) == 0);
  CHECK(fs::exists(dir / "data" / "train" / "manifest.txt"));
  CHECK(fs::exists(dir / "data" / "train" / "inputs.f32"));
  CHECK(fs::exists(dir / "data" / "test" / "labels.i32"));
  CHECK(fs::exists(dir / "data" / "profile.csv"));
  CHECK(fs::exists(dir / "data" / "config.txt"));

  // train
  REQUIRE(run_cli("train --config \"" + cfg.string() + "\" --out \"" +
                      (dir / "train_out").string() + "\"",
                  log) == 0);
  CHECK(fs::exists(dir / "train_out" / "metrics.csv"));
  CHECK(fs::exists(dir / "train_out" / "checkpoint_stage1.bin"));
  CHECK(fs::exists(dir / "train_out" / "checkpoint_stage2.bin"));
  CHECK(fs::exists(dir / "train_out" / "config.txt"));
  {
    std::string metrics = slurp(dir / "train_out" / "metrics.csv");
    CHECK(metrics.rfind("# config_hash=", 0) == 0);
    CHECK(metrics.find("stage,epoch,loss,") != std::string::npos);
  }

  // --seed overrides the config seed and lands in the artifacts.
  REQUIRE(run_cli("train --config \"" + cfg.string() + "\" --seed 6 --out \"" +
                      (dir / "train_out6").string() + "\"",
                  log) == 0);
  {
    std::string m5 = slurp(dir / "train_out" / "metrics.csv");
    std::string m6 = slurp(dir / "train_out6" / "metrics.csv");
    CHECK(m5 != m6);
    CHECK(m6.find("seed=6") != std::string::npos);
  }

  // eval
  REQUIRE(run_cli("eval --checkpoint \"" +
                      (dir / "train_out" / "checkpoint_stage2.bin").string() +
                      "\" --data \"" + (dir / "data" / "test").string() +
                      "\" --profile \"" +
                      (dir / "data" / "profile.csv").string() + "\" --out \"" +
                      (dir / "eval_out").string() + "\"",
                  log) == 0);
  CHECK(fs::exists(dir / "eval_out" / "eval.json"));
  {
    std::string json = slurp(dir / "eval_out" / "eval.json");
    CHECK(json.find("\"overall\"") != std::string::npos);
    CHECK(json.find("\"confusion\"") != std::string::npos);
    CHECK(json.find("\"config_hash\"") != std::string::npos);
  }

  // analyze: oracles need no checkpoint
  REQUIRE(run_cli("analyze --which oracles --config \"" + cfg.string() +
                      "\" --out \"" + (dir / "oracle_out").string() + "\"",
                  log) == 0);
  CHECK(fs::exists(dir / "oracle_out" / "oracles.csv"));
  {
    std::string csv = slurp(dir / "oracle_out" / "oracles.csv");
    CHECK(csv.find("oracle,trials,kept,violations,max_slack") !=
          std::string::npos);
    CHECK(csv.find("correct_dim2") != std::string::npos);
    CHECK(csv.find("wrong_dim2") != std::string::npos);
  }

  // analyze: margin audit against the trained checkpoint
  REQUIRE(run_cli("analyze --which margin --config \"" + cfg.string() +
                      "\" --checkpoint \"" +
                      (dir / "train_out" / "checkpoint_stage2.bin").string() +
                      "\" --data \"" + (dir / "data" / "train").string() +
                      "\" --out \"" + (dir / "margin_out").string() + "\"",
                  log) == 0);
  CHECK(fs::exists(dir / "margin_out" / "margin_report.csv"));

  // analyze: embeddings
  REQUIRE(run_cli("analyze --which embeddings --config \"" + cfg.string() +
                      "\" --checkpoint \"" +
                      (dir / "train_out" / "checkpoint_stage2.bin").string() +
                      "\" --data \"" + (dir / "data" / "test").string() +
                      "\" --out \"" + (dir / "embed_out").string() + "\"",
                  log) == 0);
  CHECK(fs::exists(dir / "embed_out" / "embeddings.csv"));

  fs::remove_all(dir);
}

TEST_CASE("cli error paths use the documented exit codes") {
  if (!cli_path()) {
    MESSAGE("PIH2T_CLI_PATH not set; skipping CLI test");
    return;
  }
  fs::path dir = fs::temp_directory_path() / "pih2t_test_cli_err";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path log = dir / "log.txt";

  // Unknown config key -> config error -> exit 1.
  fs::path bad = dir / "bad.cfg";
  {
    std::ofstream out(bad);
    out << "definitely_not_a_key = 1\n";
  }
  CHECK(run_cli("train --config \"" + bad.string() + "\" --out \"" +
                    (dir / "out").string() + "\"",
                log) == 1);
  CHECK(slurp(log).find("config error:") != std::string::npos);

  // Missing dataset directory -> runtime error -> exit 2.
  fs::path cfg = dir / "ok.cfg";
  {
    std::ofstream out(cfg);
    out << "data_dir = " << (dir / "nowhere").string() << "\n";
  }
  CHECK(run_cli("train --config \"" + cfg.string() + "\" --out \"" +
                    (dir / "out2").string() + "\"",
                log) == 2);
  CHECK(slurp(log).find("error:") != std::string::npos);

  fs::remove_all(dir);
}

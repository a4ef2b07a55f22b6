#include "pih2t/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "pih2t/common.hpp"

namespace pih2t {

namespace {

using Json = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_config_copy(const RunConfig& config,
                       const std::filesystem::path& out_dir) {
  std::string text = "# config_hash=" + hex_u64(config.hash()) + "\n" +
                     config.canonical_text();
  write_text(out_dir / "config.txt", text);
}

void write_json(const Json& j, const std::filesystem::path& path) {
  write_text(path, j.dump(2) + "\n");
}

Json metrics_json(const MetricsReport& m) {
  Json j;
  j["overall"] = m.overall;
  j["head"] = m.head ? Json(*m.head) : Json(nullptr);
  j["medium"] = m.medium ? Json(*m.medium) : Json(nullptr);
  j["tail"] = m.tail ? Json(*m.tail) : Json(nullptr);
  return j;
}

std::string metrics_line(const MetricsReport& m) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("undefined");
  };
  return "overall=" + format_double(m.overall) + " head=" + opt(m.head) +
         " medium=" + opt(m.medium) + " tail=" + opt(m.tail);
}

Partition partition_for(const LabeledDataset& data,
                        const std::optional<std::filesystem::path>& profile_csv,
                        const PartitionSpec& spec) {
  ClassProfile profile =
      profile_csv ? load_profile_csv(*profile_csv) : data.profile();
  return partition_classes(profile, spec);
}

}  // namespace

std::size_t configured_threads() {
  const char* env = std::getenv("PIH2T_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1)
    throw ConfigError("PIH2T_THREADS must be a positive integer, got '" +
                      std::string(env) + "'");
  return static_cast<std::size_t>(v);
}

void cmd_synth(const RunConfig& config, const std::filesystem::path& out) {
  ClassProfile profile = config.build_profile();
  SynthParams params = config.synth_params();

  LabeledDataset train =
      synth_gaussian_longtail(profile, params, config.seed, 0);
  ClassProfile test_profile;
  test_profile.counts.assign(profile.class_count(), config.test_per_class);
  LabeledDataset test =
      synth_gaussian_longtail(test_profile, params, config.seed, 1);

  std::filesystem::create_directories(out);
  save_dataset(train, out / "train");
  save_dataset(test, out / "test");
  save_profile_csv(profile, out / "profile.csv");
  write_config_copy(config, out);

  std::cout << "synth: wrote " << train.size() << " train / " << test.size()
            << " test samples, " << profile.class_count() << " classes, dim "
            << params.dim << ", imbalance "
            << format_double(profile.imbalance_ratio()) << " -> "
            << out.string() << "\n";
}

void cmd_train(const RunConfig& config, const std::filesystem::path& out) {
  if (config.data_dir.empty())
    throw ConfigError("train: config needs data_dir");
  std::filesystem::path data(config.data_dir);
  LabeledDataset train = load_dataset(data / "train");
  LabeledDataset test = load_dataset(data / "test");
  ClassProfile profile = load_profile_csv(data / "profile.csv");

  BackboneSpec spec = config.backbone_spec(train.dim);
  TrainConfig tconfig = config.train_config();
  TrainOutput result =
      run_training(train, test, profile, spec, tconfig);

  std::filesystem::create_directories(out);
  write_config_copy(config, out);
  std::uint64_t hash = config.hash();
  write_metrics_csv(result.rows, hash, config.seed, out / "metrics.csv");

  CheckpointMeta meta1;
  meta1.config_hash = hash;
  meta1.seed = config.seed;
  meta1.stage = 1;
  meta1.epoch = static_cast<std::uint32_t>(config.stage1_epochs);
  meta1.mode = config.mode;
  meta1.rng_state = Rng(config.seed).state_string();
  save_checkpoint(result.after_stage1, meta1, out / "checkpoint_stage1.bin");

  bool staged2 =
      config.mode != Mode::ce_baseline && config.stage2_epochs > 0;
  if (staged2) {
    CheckpointMeta meta2 = meta1;
    meta2.stage = 2;
    meta2.epoch = static_cast<std::uint32_t>(config.stage2_epochs);
    meta2.rng_state = result.final_rng_state;
    save_checkpoint(result.final_model, meta2,
                    out / "checkpoint_stage2.bin");
  }

  if (!result.rows.empty()) {
    const EpochRow& last = result.rows.back();
    std::cout << "train[" << mode_name(config.mode) << "]: stage "
              << last.stage << " done, train_acc="
              << format_double(last.train_acc) << ", test "
              << metrics_line(last.test) << "\n";
  } else {
    std::cout << "train[" << mode_name(config.mode)
              << "]: zero epochs requested; wrote initialization\n";
  }
}

void cmd_eval(const std::filesystem::path& checkpoint,
              const std::filesystem::path& data_dir,
              const std::optional<std::filesystem::path>& profile_csv,
              const std::filesystem::path& out) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint);
  LabeledDataset data = load_dataset(data_dir);
  // Default thresholds; a profile file only changes which classes fall in
  // which group, not the thresholds themselves.
  Partition partition = partition_for(data, profile_csv, PartitionSpec{});

  EvalResult result = evaluate(ck.model, data, partition);

  Json j;
  j["config_hash"] = hex_u64(ck.meta.config_hash);
  j["seed"] = ck.meta.seed;
  j["stage"] = ck.meta.stage;
  j["mode"] = mode_name(ck.meta.mode);
  j["samples"] = data.size();
  j["metrics"] = metrics_json(result.metrics);
  j["confusion"] = result.confusion;

  std::filesystem::create_directories(out);
  write_json(j, out / "eval.json");
  std::cout << "eval: " << metrics_line(result.metrics) << " ("
            << data.size() << " samples)\n";
}

void cmd_analyze(const RunConfig& config, const std::string& which,
                 const std::filesystem::path& checkpoint,
                 const std::filesystem::path& data_dir,
                 const std::optional<std::filesystem::path>& profile_csv,
                 const std::filesystem::path& out) {
  std::filesystem::create_directories(out);

  if (which == "oracles") {
    std::size_t threads = configured_threads();
    std::vector<OracleReport> reports;
    for (std::size_t dim : config.oracle_dims) {
      reports.push_back(force_oracle_correct(config.oracle_trials, dim,
                                             config.seed, threads));
      reports.push_back(force_oracle_wrong(config.oracle_trials, dim,
                                           config.seed, threads));
    }
    write_oracle_csv(reports, config.hash(), config.seed,
                     out / "oracles.csv");
    for (const OracleReport& r : reports)
      std::cout << "oracle " << r.name << " dim=" << r.dim << ": attempts="
                << r.attempts << " kept=" << r.kept << " violations="
                << r.violations << " max_slack="
                << format_double(r.max_slack) << " angle_mismatches="
                << r.angle_mismatches << "\n";
    return;
  }

  if (checkpoint.empty())
    throw ConfigError("analyze " + which + ": --checkpoint is required");
  LoadedCheckpoint ck = load_checkpoint(checkpoint);
  LabeledDataset data = load_dataset(data_dir);
  std::uint64_t hash = ck.meta.config_hash;
  std::uint64_t seed = ck.meta.seed;

  if (which == "margin") {
    MarginAudit audit = margin_audit(ck.model, data);
    std::ofstream csv(out / "margin_report.csv",
                      std::ios::binary | std::ios::trunc);
    if (!csv)
      throw std::runtime_error("cannot write margin_report.csv");
    csv << "# config_hash=" << hex_u64(hash) << " seed=" << seed << '\n';
    csv << "target,rival,margin,positive\n";
    for (const MarginAuditRow& row : audit.rows)
      csv << row.target << ',' << row.rival << ','
          << format_double(row.margin) << ','
          << (row.margin > 0.0 ? 1 : 0) << '\n';
    std::cout << "margin audit: pairs=" << audit.rows.size()
              << " fraction_positive="
              << format_double(audit.fraction_positive) << "\n";
  } else if (which == "forces") {
    Partition partition =
        partition_for(data, profile_csv, config.partition_spec());
    ForceBalanceReport rep = force_balance_report(
        ck.model, data, partition, config.batch_size, config.seed);
    Json j;
    j["config_hash"] = hex_u64(hash);
    j["seed"] = seed;
    j["total_pairs"] = rep.total_pairs;
    j["equal_label"] = rep.equal_label;
    j["correct_type"] = rep.correct_type;
    j["wrong_type"] = rep.wrong_type;
    j["neither"] = rep.neither;
    j["tail_head_pairs"] = rep.tail_head_pairs;
    j["tail_head_correct"] = rep.tail_head_correct;
    j["tail_head_wrong"] = rep.tail_head_wrong;
    j["mean_ratio"] = rep.mean_ratio;
    write_json(j, out / "force_balance.json");
    std::cout << "force balance: correct_type=" << rep.correct_type
              << " wrong_type=" << rep.wrong_type << " neither="
              << rep.neither << " (pairs=" << rep.total_pairs << ")\n";
  } else if (which == "embeddings") {
    export_embeddings(ck.model, data, config.projector_kind(), hash, seed,
                      out / "embeddings.csv");
    std::cout << "embeddings: wrote " << data.size() << " rows ("
              << config.projector << ")\n";
  } else if (which == "boundary") {
    Partition partition =
        partition_for(data, profile_csv, config.partition_spec());
    std::size_t C = ck.model.class_count();
    auto a = static_cast<std::size_t>(config.boundary_class_a);
    std::size_t b = config.boundary_class_b < 0
                        ? C - 1
                        : static_cast<std::size_t>(config.boundary_class_b);
    BoundaryReport rep =
        boundary_report(ck.model, data, a, b, partition);
    Json j;
    j["config_hash"] = hex_u64(hash);
    j["seed"] = seed;
    j["class_a"] = rep.class_a;
    j["class_b"] = rep.class_b;
    j["a_to_b"] = rep.a_to_b;
    j["b_to_a"] = rep.b_to_a;
    j["mean_gap_true_a"] = rep.mean_gap_true_a;
    j["mean_gap_true_b"] = rep.mean_gap_true_b;
    j["tail_to_head"] = rep.tail_to_head;
    write_json(j, out / "boundary.json");
    std::cout << "boundary " << rep.class_a << "/" << rep.class_b
              << ": a_to_b=" << rep.a_to_b << " b_to_a=" << rep.b_to_a
              << " tail_to_head=" << rep.tail_to_head << "\n";
  } else {
    throw ConfigError(
        "analyze: unknown report '" + which +
        "' (expected margin, forces, oracles, embeddings, or boundary)");
  }
}

}  // namespace pih2t

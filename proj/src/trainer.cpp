#include "pih2t/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pih2t/common.hpp"
#include "pih2t/h2tf.hpp"

namespace pih2t {

namespace {

constexpr std::uint64_t kStage1SamplerSalt = 0x733173616d70ull;  // "s1samp"
constexpr std::uint64_t kBalancedSalt = 0x62616c616e63ull;       // "balanc"
constexpr std::uint64_t kInstanceSalt = 0x696e7374616eull;       // "instan"

struct SgdState {
  ParamSet backbone;
  std::vector<double> pif_a, pif_b;
  Matrix classifier;
};

void momentum_step(std::vector<double>& p, const std::vector<double>& g,
                   std::vector<double>& v, double lr, double momentum) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = momentum * v[i] + g[i];
    p[i] -= lr * v[i];
  }
}

double stage1_lr_at(const TrainConfig& cfg, std::size_t epoch_1based) {
  double lr = cfg.lr;
  for (std::size_t decay_epoch : cfg.effective_decay_epochs())
    if (epoch_1based >= decay_epoch) lr *= cfg.decay_factor;
  return lr;
}

double stage2_lr_at(const TrainConfig& cfg, std::size_t epoch_1based) {
  double base = cfg.effective_stage2_lr();
  double t = static_cast<double>(epoch_1based - 1) /
             static_cast<double>(cfg.stage2_epochs);
  return base * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
}

void check_finite(double loss, int stage, std::size_t epoch,
                  std::size_t step) {
  if (!std::isfinite(loss))
    throw std::runtime_error(
        "training diverged: non-finite loss at stage " +
        std::to_string(stage) + " epoch " + std::to_string(epoch) +
        " step " + std::to_string(step));
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (lr <= 0.0) throw ConfigError("train: lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0)
    throw ConfigError("train: momentum must lie in [0, 1)");
  if (decay_factor <= 0.0 || decay_factor > 1.0)
    throw ConfigError("train: decay_factor must lie in (0, 1]");
  if (stage2_lr == 0.0 || (stage2_lr > 0.0 && stage2_lr > 1e3))
    throw ConfigError("train: stage2_lr out of range");
}

std::vector<std::size_t> TrainConfig::effective_decay_epochs() const {
  if (!decay_epochs.empty()) return decay_epochs;
  std::vector<std::size_t> out;
  auto push = [&](double frac) {
    auto e = static_cast<std::size_t>(
        std::floor(frac * static_cast<double>(stage1_epochs)));
    if (e >= 1 && (out.empty() || out.back() != e)) out.push_back(e);
  };
  push(0.8);
  push(0.9);
  return out;
}

double TrainConfig::effective_stage2_lr() const {
  return stage2_lr < 0.0 ? 0.1 * lr : stage2_lr;
}

TrainOutput run_training(const LabeledDataset& train,
                         const LabeledDataset& test,
                         const ClassProfile& train_profile,
                         const BackboneSpec& backbone_spec,
                         const TrainConfig& config,
                         const LossFn& loss) {
  config.validate();
  if (train.size() == 0) throw ConfigError("train: empty dataset");
  if (train.dim != test.dim || train.class_count != test.class_count)
    throw ConfigError("train: train/test dataset shape mismatch");
  if (train_profile.class_count() != train.class_count)
    throw ConfigError("train: profile/dataset class count mismatch");

  Rng master(config.seed);
  bool use_pif = config.mode == Mode::pi_h2t;
  Model model = init_model(backbone_spec, train.class_count, use_pif, master);
  Partition partition = partition_classes(train_profile, config.partition);

  const std::size_t batch = config.batch_size;
  const std::size_t steps_per_epoch = (train.size() + batch - 1) / batch;
  const std::size_t d = model.feature_dim();
  const std::size_t C = model.class_count();

  TrainOutput out;

  SgdState vel;
  vel.backbone = model.backbone.zero_like();
  vel.pif_a.assign(d, 0.0);
  vel.pif_b.assign(d, 0.0);
  vel.classifier = Matrix(C, d);

  // ---- Stage 1: representation learning on the instance stream ----
  IndexSampler stage1_sampler(train, BranchKind::instance,
                              mix_seed(config.seed, kStage1SamplerSalt));

  std::vector<Backbone::Cache> caches(batch);
  std::vector<FeatureMap> raw_maps(batch), post_maps(batch);

  for (std::size_t epoch = 1; epoch <= config.stage1_epochs; ++epoch) {
    double lr = stage1_lr_at(config, epoch);
    double epoch_loss = 0.0;
    std::size_t correct = 0, seen = 0;

    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      std::vector<std::size_t> idx = stage1_sampler.next_batch(batch);

      Matrix logits(batch, C);
      std::vector<std::int32_t> labels(batch);
      std::vector<std::vector<double>> feats(batch);
      for (std::size_t j = 0; j < batch; ++j) {
        const float* x = train.input(idx[j]);
        labels[j] = train.labels[idx[j]];
        raw_maps[j] = model.backbone.forward(x, &caches[j]);
        post_maps[j] = use_pif ? pif_fuse(raw_maps[j], model.pif)
                               : raw_maps[j];
        feats[j] = pooled_representation(post_maps[j]);
        std::vector<double> z = model.logits_of(feats[j]);
        std::copy(z.begin(), z.end(), logits.row(j));
      }

      LossResult lr_res = loss(logits, labels, &train_profile);
      check_finite(lr_res.loss, 1, epoch, step);
      epoch_loss += lr_res.loss;
      for (std::size_t j = 0; j < batch; ++j)
        if (lr_res.predictions[j] == labels[j]) ++correct;
      seen += batch;

      ParamSet bgrads = model.backbone.zero_like();
      std::vector<double> ga(d, 0.0), gb(d, 0.0);
      Matrix gw(C, d);
      for (std::size_t j = 0; j < batch; ++j) {
        const double* gz = lr_res.grad_logits.row(j);
        std::vector<double> gf(d, 0.0);
        for (std::size_t r = 0; r < C; ++r) {
          const double* wrow = model.classifier.row(r);
          double* gwrow = gw.row(r);
          for (std::size_t c = 0; c < d; ++c) {
            gwrow[c] += gz[r] * feats[j][c];
            gf[c] += gz[r] * wrow[c];
          }
        }
        FeatureMap gmap = pooled_backward(post_maps[j], gf);
        if (use_pif) {
          PifGradients pg = pif_backward(raw_maps[j], model.pif, gmap);
          for (std::size_t c = 0; c < d; ++c) {
            ga[c] += pg.a[c];
            gb[c] += pg.b[c];
          }
          gmap = std::move(pg.input);
        }
        model.backbone.backward(caches[j], gmap, &bgrads);
      }

      for (std::size_t l = 0; l < bgrads.w.size(); ++l) {
        momentum_step(model.backbone.params().w[l].data, bgrads.w[l].data,
                      vel.backbone.w[l].data, lr, config.momentum);
        momentum_step(model.backbone.params().b[l], bgrads.b[l],
                      vel.backbone.b[l], lr, config.momentum);
      }
      if (use_pif) {
        momentum_step(model.pif.a, ga, vel.pif_a, lr, config.momentum);
        momentum_step(model.pif.b, gb, vel.pif_b, lr, config.momentum);
      }
      momentum_step(model.classifier.data, gw.data, vel.classifier.data, lr,
                    config.momentum);
    }

    EpochRow row;
    row.stage = 1;
    row.epoch = epoch;
    row.loss = epoch_loss / static_cast<double>(steps_per_epoch);
    row.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    row.test = evaluate(model, test, partition).metrics;
    out.rows.push_back(std::move(row));
  }

  out.after_stage1 = model;

  // ---- Stage 2: classifier calibration on the balanced stream ----
  if (config.mode != Mode::ce_baseline && config.stage2_epochs > 0) {
    if (config.stage2_reset_classifier) {
      Rng reset_rng = master.fork(0x726573657477ull);  // "resetw"
      double stddev = std::sqrt(1.0 / static_cast<double>(d));
      for (double& v : model.classifier.data)
        v = reset_rng.normal(0.0, stddev);
    }
    Matrix ratio_weights = model.classifier;  // used when frozen-ratio flag set

    IndexSampler balanced(train, BranchKind::balanced,
                          mix_seed(config.seed, kBalancedSalt));
    IndexSampler instance(train, BranchKind::instance,
                          mix_seed(config.seed, kInstanceSalt));

    // Fresh momentum for the stage-2 optimizer.
    vel.classifier = Matrix(C, d);
    bool fuse = config.mode == Mode::pi_h2t;

    for (std::size_t epoch = 1; epoch <= config.stage2_epochs; ++epoch) {
      double lr = stage2_lr_at(config, epoch);
      double epoch_loss = 0.0, ratio_sum = 0.0;
      std::size_t correct = 0, seen = 0, head_fusing = 0, pairs = 0;

      for (std::size_t step = 0; step < steps_per_epoch; ++step) {
        std::vector<std::size_t> idx_b = balanced.next_batch(batch);
        std::vector<std::int32_t> labels(batch);
        std::vector<std::vector<double>> feats_b(batch);
        for (std::size_t j = 0; j < batch; ++j) {
          feats_b[j] = model.pooled_feature(train.input(idx_b[j]));
          labels[j] = train.labels[idx_b[j]];
        }

        std::vector<std::vector<double>> train_feats;
        if (fuse) {
          std::vector<std::size_t> idx_i = instance.next_batch(batch);
          std::vector<std::vector<double>> feats_i(batch);
          for (std::size_t j = 0; j < batch; ++j) {
            feats_i[j] = model.pooled_feature(train.input(idx_i[j]));
            int group = partition.group_of[static_cast<std::size_t>(
                train.labels[idx_i[j]])];
            if (group == 0) ++head_fusing;
            ++pairs;
          }
          if (config.stage2_force_unit_ratio) {
            ratio_sum += static_cast<double>(batch);
            train_feats = feats_b;
          } else {
            const Matrix& rw = config.stage2_freeze_ratio_weights
                                   ? ratio_weights
                                   : model.classifier;
            FusedBatch fb = couple_branches(feats_b, labels, feats_i, rw);
            for (double r : fb.ratios) ratio_sum += r;
            train_feats = std::move(fb.fused);
          }
        } else {
          train_feats = feats_b;
        }

        Matrix logits(batch, C);
        for (std::size_t j = 0; j < batch; ++j) {
          std::vector<double> z = model.logits_of(train_feats[j]);
          std::copy(z.begin(), z.end(), logits.row(j));
        }
        LossResult lr_res = loss(logits, labels, &train_profile);
        check_finite(lr_res.loss, 2, epoch, step);
        epoch_loss += lr_res.loss;
        for (std::size_t j = 0; j < batch; ++j)
          if (lr_res.predictions[j] == labels[j]) ++correct;
        seen += batch;

        // Only the classifier trains; the fusion ratio is treated as a
        // constant of the step (no gradient through the distance).
        Matrix gw(C, d);
        for (std::size_t j = 0; j < batch; ++j) {
          const double* gz = lr_res.grad_logits.row(j);
          for (std::size_t r = 0; r < C; ++r) {
            double* gwrow = gw.row(r);
            for (std::size_t c = 0; c < d; ++c)
              gwrow[c] += gz[r] * train_feats[j][c];
          }
        }
        momentum_step(model.classifier.data, gw.data, vel.classifier.data,
                      lr, config.momentum);
      }

      EpochRow row;
      row.stage = 2;
      row.epoch = epoch;
      row.loss = epoch_loss / static_cast<double>(steps_per_epoch);
      row.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
      row.test = evaluate(model, test, partition).metrics;
      if (fuse) {
        row.mean_r = ratio_sum / static_cast<double>(seen);
        row.head_fusing_frac =
            static_cast<double>(head_fusing) / static_cast<double>(pairs);
      }
      out.rows.push_back(std::move(row));
    }
  }

  out.final_model = std::move(model);
  out.final_rng_state = master.state_string();
  return out;
}

EvalResult evaluate(const Model& model, const LabeledDataset& data,
                    const Partition& partition) {
  if (data.class_count != model.class_count())
    throw ConfigError("evaluate: dataset/model class count mismatch");
  EvalResult r;
  r.predictions = model.predict(data);
  r.metrics = partition_metrics(r.predictions, data.labels, partition);
  r.confusion = confusion_matrix(r.predictions, data.labels,
                                 model.class_count());
  return r;
}

void write_metrics_csv(const std::vector<EpochRow>& rows,
                       std::uint64_t config_hash, std::uint64_t seed,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# config_hash=" << hex_u64(config_hash) << " seed=" << seed << '\n';
  out << "stage,epoch,loss,train_acc,overall_acc,head_acc,med_acc,tail_acc,"
         "mean_r,head_fusing_frac\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const EpochRow& r : rows) {
    out << r.stage << ',' << r.epoch << ',' << format_double(r.loss) << ','
        << format_double(r.train_acc) << ',' << format_double(r.test.overall)
        << ',' << opt(r.test.head) << ',' << opt(r.test.medium) << ','
        << opt(r.test.tail) << ',' << opt(r.mean_r) << ','
        << opt(r.head_fusing_frac) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace pih2t

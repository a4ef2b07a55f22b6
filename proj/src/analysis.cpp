#include "pih2t/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "pih2t/common.hpp"
#include "pih2t/h2tf.hpp"
#include "pih2t/pif.hpp"

namespace pih2t {

// ---- margin audit ---------------------------------------------------------

MarginAudit margin_audit(const Model& model, const LabeledDataset& data) {
  if (!model.use_pif)
    throw ConfigError("margin_audit: model has no fusion layer");
  if (data.size() == 0) throw ConfigError("margin_audit: empty dataset");

  const std::size_t C = model.class_count();
  std::vector<double> sum(C, 0.0);
  std::vector<std::size_t> count(C, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    FeatureMap map = model.backbone.forward(data.input(i));
    FeatureMap pi = pi_mean(map);
    double s = 0.0;
    for (double v : pi.data) s += v;
    s /= static_cast<double>(pi.data.size());
    auto y = static_cast<std::size_t>(data.labels[i]);
    sum[y] += s;
    ++count[y];
  }

  MarginAudit audit;
  audit.class_pi_mean.resize(C);
  for (std::size_t y = 0; y < C; ++y) {
    if (count[y] == 0)
      throw ConfigError("margin_audit: class " + std::to_string(y) +
                        " has no samples");
    audit.class_pi_mean[y] = sum[y] / static_cast<double>(count[y]);
  }

  // The pooled PI feature of class y has the same value on every channel, so
  // w . f_PI(y) reduces to s_y times the row-sum of w.
  std::vector<double> row_sum(C, 0.0);
  for (std::size_t r = 0; r < C; ++r)
    for (std::size_t c = 0; c < model.classifier.cols; ++c)
      row_sum[r] += model.classifier.at(r, c);

  std::size_t positive = 0;
  for (std::size_t y = 0; y < C; ++y)
    for (std::size_t i = 0; i < C; ++i) {
      if (i == y) continue;
      MarginAuditRow row;
      row.target = y;
      row.rival = i;
      row.margin = audit.class_pi_mean[y] * (row_sum[y] - row_sum[i]);
      if (row.margin > 0.0) ++positive;
      audit.rows.push_back(row);
    }
  audit.fraction_positive =
      static_cast<double>(positive) / static_cast<double>(audit.rows.size());

  audit.scale_factor.resize(model.pif.dim());
  for (std::size_t c = 0; c < model.pif.dim(); ++c) {
    double denom = model.pif.a[c] + model.pif.b[c];
    audit.scale_factor[c] =
        denom == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                     : model.pif.a[c] / denom;
  }
  return audit;
}

// ---- force oracles --------------------------------------------------------

namespace {

constexpr double kSlackTolerance = 1e-9;
constexpr std::uint64_t kOracleCorrectSalt = 0x636f7272ull;  // "corr"
constexpr std::uint64_t kOracleWrongSalt = 0x77726f6eull;    // "wron"

struct TrialOutcome {
  bool kept = false;
  double slack = 0.0;          // (wrong side) - (right side); <= 0 when fine
  bool angle_mismatch = false;
};

// One independently seeded tuple. `wrong_case` selects the premise pair for
// the misclassified-tail implication.
TrialOutcome run_trial(std::uint64_t oracle_seed, std::uint64_t index,
                       std::size_t dim, bool wrong_case) {
  Rng rng(mix_seed(oracle_seed, index));
  std::vector<double> w_t(dim), w_h(dim), f_t(dim), f_h(dim);
  for (double& v : w_t) v = rng.normal();
  for (double& v : w_h) v = rng.normal();
  for (double& v : f_t) v = rng.normal();
  for (double& v : f_h) v = rng.normal();
  double r = rng.uniform(0.05, 0.95);

  double zt_raw = dot(w_t, f_t);
  double zh_raw = dot(w_h, f_t);
  std::vector<double> fused(dim);
  for (std::size_t c = 0; c < dim; ++c)
    fused[c] = r * f_t[c] + (1.0 - r) * f_h[c];
  double zt_fused = dot(w_t, fused);
  double zh_fused = dot(w_h, fused);

  TrialOutcome out;
  bool premises = wrong_case ? (zh_raw > zt_raw && zt_fused > zh_fused)
                             : (zt_raw > zh_raw && zh_fused > zt_fused);
  if (!premises) return out;
  out.kept = true;

  std::vector<double> delta(dim);
  for (std::size_t c = 0; c < dim; ++c) delta[c] = f_t[c] - f_h[c];
  double lhs = wrong_case ? dot(w_h, delta) : dot(w_t, delta);
  double rhs = wrong_case ? dot(w_t, delta) : dot(w_h, delta);
  out.slack = rhs - lhs;

  // Angle form |w| cos(theta) computed against the same difference vector;
  // its sign must agree with the inner-product form.
  double dn = norm2(delta);
  if (dn > 0.0) {
    double g1 = lhs - rhs;
    double g2 = lhs / dn - rhs / dn;
    out.angle_mismatch = (g1 > kSlackTolerance && g2 < -kSlackTolerance) ||
                         (g1 < -kSlackTolerance && g2 > kSlackTolerance);
  }
  return out;
}

OracleReport run_oracle(const std::string& name, std::uint64_t salt,
                        std::size_t target_kept, std::size_t dim,
                        std::uint64_t seed, std::size_t threads,
                        bool wrong_case) {
  if (dim < 2) throw ConfigError("force oracle: dim must be >= 2");
  if (target_kept == 0)
    throw ConfigError("force oracle: trial count must be positive");
  if (threads == 0) threads = 1;

  OracleReport report;
  report.name = name;
  report.dim = dim;
  report.max_slack = -std::numeric_limits<double>::infinity();
  std::uint64_t oracle_seed = mix_seed(mix_seed(seed, salt), dim);

  // Attempts are consumed in index order and sharded in fixed-size chunks;
  // per-attempt seeding makes the outcome independent of the thread count.
  constexpr std::size_t kChunk = 4096;
  std::uint64_t next_index = 0;
  while (report.kept < target_kept) {
    std::size_t lanes = threads;
    std::vector<std::vector<TrialOutcome>> results(lanes);
    std::vector<std::thread> pool;
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      std::uint64_t base = next_index + lane * kChunk;
      results[lane].resize(kChunk);
      pool.emplace_back([&, lane, base]() {
        for (std::size_t k = 0; k < kChunk; ++k)
          results[lane][k] = run_trial(oracle_seed, base + k, dim, wrong_case);
      });
    }
    for (auto& t : pool) t.join();
    next_index += lanes * kChunk;

    for (std::size_t lane = 0; lane < lanes && report.kept < target_kept;
         ++lane) {
      for (const TrialOutcome& out : results[lane]) {
        ++report.attempts;
        if (!out.kept) continue;
        ++report.kept;
        report.max_slack = std::max(report.max_slack, out.slack);
        if (out.slack > kSlackTolerance) ++report.violations;
        if (out.angle_mismatch) ++report.angle_mismatches;
        if (report.kept == target_kept) break;
      }
    }
  }
  return report;
}

}  // namespace

OracleReport force_oracle_correct(std::size_t target_kept, std::size_t dim,
                                  std::uint64_t seed, std::size_t threads) {
  return run_oracle("correct", kOracleCorrectSalt, target_kept, dim, seed,
                    threads, /*wrong_case=*/false);
}

OracleReport force_oracle_wrong(std::size_t target_kept, std::size_t dim,
                                std::uint64_t seed, std::size_t threads) {
  return run_oracle("wrong", kOracleWrongSalt, target_kept, dim, seed,
                    threads, /*wrong_case=*/true);
}

void write_oracle_csv(const std::vector<OracleReport>& reports,
                      std::uint64_t config_hash, std::uint64_t seed,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# config_hash=" << hex_u64(config_hash) << " seed=" << seed << '\n';
  out << "oracle,trials,kept,violations,max_slack\n";
  for (const OracleReport& r : reports)
    out << r.name << "_dim" << r.dim << ',' << r.attempts << ',' << r.kept
        << ',' << r.violations << ',' << format_double(r.max_slack) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---- force balance on real data ------------------------------------------

ForceBalanceReport force_balance_report(const Model& model,
                                        const LabeledDataset& train,
                                        const Partition& partition,
                                        std::size_t batch_size,
                                        std::uint64_t seed) {
  if (batch_size == 0)
    throw ConfigError("force_balance_report: batch_size must be positive");
  ForceBalanceReport rep;
  IndexSampler balanced(train, BranchKind::balanced,
                        mix_seed(seed, 0x6662616cull));  // "fbal"
  IndexSampler instance(train, BranchKind::instance,
                        mix_seed(seed, 0x66696e73ull));  // "fins"

  const std::size_t steps = (train.size() + batch_size - 1) / batch_size;
  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;

  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<std::size_t> idx_b = balanced.next_batch(batch_size);
    std::vector<std::size_t> idx_i = instance.next_batch(batch_size);
    std::vector<std::vector<double>> feats_b(batch_size), feats_i(batch_size);
    std::vector<std::int32_t> labels_b(batch_size);
    for (std::size_t j = 0; j < batch_size; ++j) {
      feats_b[j] = model.pooled_feature(train.input(idx_b[j]));
      feats_i[j] = model.pooled_feature(train.input(idx_i[j]));
      labels_b[j] = train.labels[idx_b[j]];
    }
    std::vector<double> r =
        fusion_ratios(feats_b, labels_b, model.classifier);

    for (std::size_t j = 0; j < batch_size; ++j) {
      ratio_sum += r[j];
      ++ratio_count;
      ++rep.total_pairs;
      auto y_b = static_cast<std::size_t>(labels_b[j]);
      auto y_i = static_cast<std::size_t>(train.labels[idx_i[j]]);
      if (y_b == y_i) {
        ++rep.equal_label;
        continue;
      }
      std::vector<double> fused =
          h2tf_fuse(feats_b[j], feats_i[j], r[j]);
      const double* w_b = model.classifier.row(y_b);
      const double* w_i = model.classifier.row(y_i);
      std::size_t d = model.classifier.cols;
      bool raw_balanced = dot(w_b, feats_b[j].data(), d) >
                          dot(w_i, feats_b[j].data(), d);
      bool fused_balanced = dot(w_b, fused.data(), d) >
                            dot(w_i, fused.data(), d);

      bool is_correct_type = raw_balanced && !fused_balanced;
      bool is_wrong_type = !raw_balanced && fused_balanced;
      if (is_correct_type)
        ++rep.correct_type;
      else if (is_wrong_type)
        ++rep.wrong_type;
      else
        ++rep.neither;

      if (partition.group_of[y_b] == 2 && partition.group_of[y_i] == 0) {
        ++rep.tail_head_pairs;
        if (is_correct_type) ++rep.tail_head_correct;
        if (is_wrong_type) ++rep.tail_head_wrong;
      }
    }
  }
  rep.mean_ratio = ratio_sum / static_cast<double>(ratio_count);
  return rep;
}

// ---- PCA ------------------------------------------------------------------

namespace {

// Deterministic generic start direction for power iteration.
std::vector<double> power_start(std::size_t d) {
  std::vector<double> v(d);
  for (std::size_t j = 0; j < d; ++j)
    v[j] = 1.0 / static_cast<double>(j + 1);
  double n = norm2(v);
  for (double& x : v) x /= n;
  return v;
}

void canonical_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (std::fabs(v[j]) > std::fabs(v[arg])) arg = j;
  if (v[arg] < 0.0)
    for (double& x : v) x = -x;
}

// Leading eigenvector of the symmetric matrix `cov` (row-major d x d).
std::pair<std::vector<double>, double> leading_eigen(
    const std::vector<double>& cov, std::size_t d) {
  std::vector<double> v = power_start(d);
  std::vector<double> next(d);
  double eigenvalue = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    for (std::size_t i = 0; i < d; ++i)
      next[i] = dot(cov.data() + i * d, v.data(), d);
    double n = norm2(next);
    if (n < 1e-14) return {std::vector<double>(d, 0.0), 0.0};
    for (double& x : next) x /= n;
    eigenvalue = n;
    double delta = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      delta += (next[i] - v[i]) * (next[i] - v[i]);
    v = next;
    if (std::sqrt(delta) < 1e-8) break;
  }
  canonical_sign(v);
  return {v, eigenvalue};
}

}  // namespace

Pca2d fit_pca2d(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ConfigError("pca: empty input");
  const std::size_t d = rows[0].size();
  Pca2d pca;
  pca.mean.assign(d, 0.0);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < d; ++j) pca.mean[j] += row[j];
  for (double& m : pca.mean) m /= static_cast<double>(rows.size());

  std::vector<double> cov(d * d, 0.0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < d; ++i) {
      double xi = row[i] - pca.mean[i];
      for (std::size_t j = 0; j < d; ++j)
        cov[i * d + j] += xi * (row[j] - pca.mean[j]);
    }
  for (double& c : cov) c /= static_cast<double>(rows.size());

  auto [v1, e1] = leading_eigen(cov, d);
  pca.axis1 = v1;
  pca.eig1 = e1;

  // Deflate and repeat for the second axis.
  if (e1 > 0.0) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        cov[i * d + j] -= e1 * v1[i] * v1[j];
  }
  auto [v2, e2] = leading_eigen(cov, d);
  pca.axis2 = v2;
  pca.eig2 = e2;
  return pca;
}

std::pair<double, double> pca_project(const Pca2d& pca,
                                      const std::vector<double>& row) {
  if (row.size() != pca.mean.size())
    throw std::invalid_argument("pca_project: dimension mismatch");
  double x = 0.0, y = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    double c = row[j] - pca.mean[j];
    x += c * pca.axis1[j];
    y += c * pca.axis2[j];
  }
  return {x, y};
}

// ---- embedding export -----------------------------------------------------

void export_embeddings(const Model& model, const LabeledDataset& data,
                       Projector projector, std::uint64_t config_hash,
                       std::uint64_t seed,
                       const std::filesystem::path& path) {
  if (data.size() == 0) throw ConfigError("export_embeddings: empty dataset");
  const std::size_t C = model.class_count();
  const std::size_t d = model.feature_dim();

  std::vector<std::vector<double>> feats(data.size());
  std::vector<std::vector<double>> logits(data.size());
  std::vector<std::int32_t> preds(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    feats[i] = model.pooled_feature(data.input(i));
    logits[i] = model.logits_of(feats[i]);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < C; ++c)
      if (logits[i][c] > logits[i][arg]) arg = c;
    preds[i] = static_cast<std::int32_t>(arg);
  }

  Pca2d pca;
  if (projector == Projector::pca2d) pca = fit_pca2d(feats);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# config_hash=" << hex_u64(config_hash) << " seed=" << seed << '\n';
  out << "sample_id,label,prediction";
  if (projector == Projector::pca2d) {
    out << ",proj_x,proj_y";
  } else {
    for (std::size_t j = 0; j < d; ++j) out << ",feat_" << j;
  }
  for (std::size_t c = 0; c < C; ++c) out << ",logit_" << c;
  out << '\n';

  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i << ',' << data.labels[i] << ',' << preds[i];
    if (projector == Projector::pca2d) {
      auto [x, y] = pca_project(pca, feats[i]);
      out << ',' << format_double(x) << ',' << format_double(y);
    } else {
      for (std::size_t j = 0; j < d; ++j)
        out << ',' << format_double(feats[i][j]);
    }
    for (std::size_t c = 0; c < C; ++c)
      out << ',' << format_double(logits[i][c]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---- boundary report ------------------------------------------------------

BoundaryReport boundary_report(const Model& model, const LabeledDataset& data,
                               std::size_t class_a, std::size_t class_b,
                               const Partition& partition) {
  const std::size_t C = model.class_count();
  if (class_a >= C || class_b >= C || class_a == class_b)
    throw ConfigError("boundary_report: bad class pair");

  BoundaryReport rep;
  rep.class_a = class_a;
  rep.class_b = class_b;
  double gap_a = 0.0, gap_b = 0.0;
  std::size_t n_a = 0, n_b = 0;

  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> f = model.pooled_feature(data.input(i));
    std::vector<double> z = model.logits_of(f);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < C; ++c)
      if (z[c] > z[arg]) arg = c;
    auto y = static_cast<std::size_t>(data.labels[i]);

    if (y == class_a) {
      gap_a += z[class_a] - z[class_b];
      ++n_a;
      if (arg == class_b) ++rep.a_to_b;
    } else if (y == class_b) {
      gap_b += z[class_a] - z[class_b];
      ++n_b;
      if (arg == class_a) ++rep.b_to_a;
    }
    if (partition.group_of[y] == 2 && partition.group_of[arg] == 0)
      ++rep.tail_to_head;
  }

  rep.mean_gap_true_a =
      n_a ? gap_a / static_cast<double>(n_a)
          : std::numeric_limits<double>::quiet_NaN();
  rep.mean_gap_true_b =
      n_b ? gap_b / static_cast<double>(n_b)
          : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace pih2t

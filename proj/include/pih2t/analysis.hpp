#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pih2t/dataset.hpp"
#include "pih2t/metrics.hpp"
#include "pih2t/model.hpp"
#include "pih2t/profile.hpp"

namespace pih2t {

// ---- classification-margin audit -----------------------------------------

struct MarginAuditRow {
  std::size_t target = 0;  // class y whose class-mean PI feature is used
  std::size_t rival = 0;   // class i being compared against
  double margin = 0.0;     // w_y . f_PI(y) - w_i . f_PI(y), unscaled
};

struct MarginAudit {
  std::vector<MarginAuditRow> rows;  // all ordered pairs target != rival
  double fraction_positive = 0.0;
  // Mean over locations of the per-location channel mean, averaged per
  // class: the pooled PI feature of class y is this scalar on every channel.
  std::vector<double> class_pi_mean;
  // Per-channel a/(a+b) of the fusion layer (descriptive; excluded from the
  // sign audit). NaN where a + b == 0.
  std::vector<double> scale_factor;
};

// Audits the sign of the classifier gap induced by the pooled PI feature.
// Requires a model that carries the fusion layer.
MarginAudit margin_audit(const Model& model, const LabeledDataset& data);

// ---- restraining-force oracles -------------------------------------------

// Brute-force verification that the two fusion-force implications hold on
// randomly sampled premise-satisfying tuples (w_t, w_h, f_t, f_h, r). Both
// implications are theorems; any violation indicates an implementation bug.
struct OracleReport {
  std::string name;       // "correct" or "wrong"
  std::size_t dim = 0;
  std::size_t attempts = 0;    // tuples sampled, including premise failures
  std::size_t kept = 0;        // premise-satisfying tuples tested
  std::size_t violations = 0;  // conclusion failures beyond 1e-9 slack
  double max_slack = 0.0;      // max over kept of (wrong side - right side)
  std::size_t angle_mismatches = 0;  // inner-product vs angle-form sign splits
};

// Correctly classified tail sample whose fused feature lands on the head
// side: conclusion w_t.(f_t - f_h) > w_h.(f_t - f_h).
OracleReport force_oracle_correct(std::size_t target_kept, std::size_t dim,
                                  std::uint64_t seed, std::size_t threads = 1);

// Misclassified tail sample whose fused feature lands on the tail side:
// conclusion w_h.(f_t - f_h) > w_t.(f_t - f_h).
OracleReport force_oracle_wrong(std::size_t target_kept, std::size_t dim,
                                std::uint64_t seed, std::size_t threads = 1);

void write_oracle_csv(const std::vector<OracleReport>& reports,
                      std::uint64_t config_hash, std::uint64_t seed,
                      const std::filesystem::path& path);

// ---- force balance on real data ------------------------------------------

// Classifies coupled balanced/instance pairs drawn from the training set by
// which premise pair they satisfy: correct-type = raw decision favors the
// balanced class AND the fused feature flips to the instance class;
// wrong-type = raw decision favors the instance class AND the fused feature
// stays with the balanced class.
struct ForceBalanceReport {
  std::size_t total_pairs = 0;
  std::size_t equal_label = 0;   // pairs sharing a label (not classified)
  std::size_t correct_type = 0;
  std::size_t wrong_type = 0;
  std::size_t neither = 0;
  // Subset where the balanced sample is a tail class and the instance
  // sample a head class (the configuration the force argument focuses on).
  std::size_t tail_head_pairs = 0;
  std::size_t tail_head_correct = 0;
  std::size_t tail_head_wrong = 0;
  double mean_ratio = 0.0;
};

ForceBalanceReport force_balance_report(const Model& model,
                                        const LabeledDataset& train,
                                        const Partition& partition,
                                        std::size_t batch_size,
                                        std::uint64_t seed);

// ---- embedding export -----------------------------------------------------

enum class Projector { none, pca2d };

struct Pca2d {
  std::vector<double> mean;
  std::vector<double> axis1, axis2;
  double eig1 = 0.0, eig2 = 0.0;
};

// Top-2 principal axes by power iteration (tolerance 1e-8, deterministic
// start vector, deflation for the second axis). Degenerate inputs (single
// point, zero variance) give zero axes, so projections are the zero vector.
Pca2d fit_pca2d(const std::vector<std::vector<double>>& rows);

std::pair<double, double> pca_project(const Pca2d& pca,
                                      const std::vector<double>& row);

// CSV: sample_id,label,prediction,proj_x,proj_y,logit_0.. for pca2d;
// the proj columns become feat_0..feat_{d-1} for Projector::none.
void export_embeddings(const Model& model, const LabeledDataset& data,
                       Projector projector, std::uint64_t config_hash,
                       std::uint64_t seed,
                       const std::filesystem::path& path);

// ---- pairwise boundary report ---------------------------------------------

struct BoundaryReport {
  std::size_t class_a = 0, class_b = 0;
  std::size_t a_to_b = 0;  // true a predicted b
  std::size_t b_to_a = 0;  // true b predicted a
  // Mean (logit_a - logit_b) over samples of each true class; NaN when the
  // class has no samples.
  double mean_gap_true_a = 0.0;
  double mean_gap_true_b = 0.0;
  // Dataset-wide count of tail-class samples predicted as head classes.
  std::size_t tail_to_head = 0;
};

BoundaryReport boundary_report(const Model& model, const LabeledDataset& data,
                               std::size_t class_a, std::size_t class_b,
                               const Partition& partition);

}  // namespace pih2t

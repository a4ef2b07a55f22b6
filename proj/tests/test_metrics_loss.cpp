#include <cmath>
#include <vector>

#include "doctest.h"
#include "pih2t/loss.hpp"
#include "pih2t/metrics.hpp"

using namespace pih2t;

TEST_CASE("partition_metrics per-group accuracy") {
  ClassProfile p;
  p.counts = {200, 50, 10};
  Partition part = partition_classes(p, PartitionSpec{100, 20});
  // class 0 head, class 1 medium, class 2 tail
  std::vector<std::int32_t> labels = {0, 0, 1, 1, 2, 2};
  std::vector<std::int32_t> preds = {0, 1, 1, 1, 2, 0};
  MetricsReport m = partition_metrics(preds, labels, part);
  CHECK(m.overall == doctest::Approx(4.0 / 6.0));
  REQUIRE(m.head.has_value());
  CHECK(*m.head == doctest::Approx(0.5));
  REQUIRE(m.medium.has_value());
  CHECK(*m.medium == doctest::Approx(1.0));
  REQUIRE(m.tail.has_value());
  CHECK(*m.tail == doctest::Approx(0.5));
}

TEST_CASE("empty groups report undefined, not zero") {
  ClassProfile p;
  p.counts = {200, 150};
  Partition part = partition_classes(p, PartitionSpec{100, 20});
  std::vector<std::int32_t> labels = {0, 1};
  std::vector<std::int32_t> preds = {0, 1};
  MetricsReport m = partition_metrics(preds, labels, part);
  CHECK(m.overall == doctest::Approx(1.0));
  CHECK(m.head.has_value());
  CHECK_FALSE(m.medium.has_value());
  CHECK_FALSE(m.tail.has_value());
}

TEST_CASE("confusion_matrix counts label-prediction pairs") {
  std::vector<std::int32_t> labels = {0, 0, 1, 1};
  std::vector<std::int32_t> preds = {0, 1, 1, 1};
  auto cm = confusion_matrix(preds, labels, 2);
  CHECK(cm[0][0] == 1);
  CHECK(cm[0][1] == 1);
  CHECK(cm[1][0] == 0);
  CHECK(cm[1][1] == 2);
}

TEST_CASE("tail_to_head_errors counts cross-group mistakes only") {
  ClassProfile p;
  p.counts = {200, 50, 10};
  Partition part = partition_classes(p, PartitionSpec{100, 20});
  std::vector<std::int32_t> labels = {2, 2, 2, 1, 0};
  std::vector<std::int32_t> preds = {0, 1, 2, 0, 2};
  // Only tail->head: the first sample.
  CHECK(tail_to_head_errors(preds, labels, part) == 1);
}

TEST_CASE("cross_entropy on uniform logits equals log C") {
  Matrix logits(2, 4);  // all zeros -> uniform softmax
  std::vector<std::int32_t> labels = {1, 3};
  LossResult r = cross_entropy(logits, labels);
  CHECK(r.loss == doctest::Approx(std::log(4.0)));
  // Gradient: (1/C - onehot) / batch
  CHECK(r.grad_logits.at(0, 0) == doctest::Approx(0.25 / 2));
  CHECK(r.grad_logits.at(0, 1) == doctest::Approx((0.25 - 1.0) / 2));
}

TEST_CASE("cross_entropy is shift-invariant and stable") {
  Matrix a(1, 3), b(1, 3);
  a.at(0, 0) = 1.0;
  a.at(0, 1) = 2.0;
  a.at(0, 2) = 0.5;
  b = a;
  for (std::size_t c = 0; c < 3; ++c) b.at(0, c) += 1000.0;
  std::vector<std::int32_t> labels = {1};
  LossResult ra = cross_entropy(a, labels);
  LossResult rb = cross_entropy(b, labels);
  CHECK(ra.loss == doctest::Approx(rb.loss));
  CHECK(std::isfinite(rb.loss));
  CHECK(ra.predictions == std::vector<std::int32_t>{1});
}

TEST_CASE("cross_entropy gradient matches finite differences") {
  Matrix logits(2, 3);
  double vals[6] = {0.3, -1.2, 0.7, 2.0, 0.1, -0.4};
  for (std::size_t i = 0; i < 6; ++i) logits.data[i] = vals[i];
  std::vector<std::int32_t> labels = {2, 0};
  LossResult r = cross_entropy(logits, labels);
  const double eps = 1e-6;
  for (std::size_t i = 0; i < 6; ++i) {
    Matrix up = logits, dn = logits;
    up.data[i] += eps;
    dn.data[i] -= eps;
    double num = (cross_entropy(up, labels).loss -
                  cross_entropy(dn, labels).loss) /
                 (2 * eps);
    CHECK(r.grad_logits.data[i] == doctest::Approx(num).epsilon(1e-5));
  }
}

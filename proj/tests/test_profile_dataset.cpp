#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "doctest.h"
#include "pih2t/dataset.hpp"
#include "pih2t/profile.hpp"

using namespace pih2t;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("pih2t_test_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST_CASE("exponential_profile hits both endpoints") {
  ClassProfile p = exponential_profile(100, 3, 100.0);
  REQUIRE(p.counts.size() == 3);
  CHECK(p.counts[0] == 100);
  CHECK(p.counts[1] == 10);
  CHECK(p.counts[2] == 1);
  CHECK(p.total() == 111);
  CHECK(p.imbalance_ratio() == doctest::Approx(100.0));

  ClassProfile big = exponential_profile(500, 100, 100.0);
  CHECK(big.counts.front() == 500);
  CHECK(big.counts.back() == 5);
  for (std::size_t i = 1; i < big.counts.size(); ++i)
    CHECK(big.counts[i] <= big.counts[i - 1]);
}

TEST_CASE("exponential_profile benchmark shape is frozen") {
  ClassProfile p = exponential_profile(500, 10, 100.0);
  std::vector<std::size_t> expected = {500, 300, 180, 108, 65, 39, 23, 14, 8, 5};
  CHECK(p.counts == expected);
  CHECK(p.total() == 1242);
}

TEST_CASE("exponential_profile rejects configs that round a class to zero") {
  CHECK_THROWS_AS(exponential_profile(10, 10, 1000.0), ConfigError);
  CHECK_THROWS_AS(exponential_profile(0, 3, 10.0), ConfigError);
  CHECK_THROWS_AS(exponential_profile(100, 0, 10.0), ConfigError);
  CHECK_THROWS_AS(exponential_profile(100, 3, 0.5), ConfigError);
}

TEST_CASE("flat exponential profile") {
  ClassProfile p = exponential_profile(50, 4, 1.0);
  for (std::size_t c : p.counts) CHECK(c == 50);
}

TEST_CASE("pareto_profile pins both endpoints and decays") {
  ClassProfile p = pareto_profile(400, 8, 10, 6.0);
  REQUIRE(p.counts.size() == 10);
  CHECK(p.counts.front() == 400);
  CHECK(p.counts.back() == 8);
  for (std::size_t i = 1; i < p.counts.size(); ++i)
    CHECK(p.counts[i] <= p.counts[i - 1]);
  CHECK_THROWS_AS(pareto_profile(8, 400, 10, 6.0), ConfigError);
  CHECK_THROWS_AS(pareto_profile(400, 8, 1, 6.0), ConfigError);
  CHECK_THROWS_AS(pareto_profile(400, 8, 10, 0.0), ConfigError);
}

TEST_CASE("partition_classes splits by absolute thresholds") {
  ClassProfile p;
  p.counts = {101, 100, 21, 20};
  Partition part = partition_classes(p, PartitionSpec{100, 20});
  CHECK(part.head == std::vector<std::size_t>{0});
  CHECK(part.medium == std::vector<std::size_t>{1, 2});
  CHECK(part.tail == std::vector<std::size_t>{3});
  CHECK(part.group_of == std::vector<int>{0, 1, 1, 2});
}

TEST_CASE("benchmark partition under default thresholds") {
  ClassProfile p = exponential_profile(500, 10, 100.0);
  Partition part = partition_classes(p, PartitionSpec{});
  CHECK(part.head == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(part.medium == std::vector<std::size_t>{4, 5, 6});
  CHECK(part.tail == std::vector<std::size_t>{7, 8, 9});
}

TEST_CASE("profile CSV round-trip") {
  fs::path dir = temp_dir("profile_csv");
  ClassProfile p = exponential_profile(500, 10, 100.0);
  fs::path file = dir / "profile.csv";
  save_profile_csv(p, file);
  ClassProfile back = load_profile_csv(file);
  CHECK(back.counts == p.counts);
  fs::remove_all(dir);
}

TEST_CASE("synth_gaussian_longtail is deterministic and well-shaped") {
  ClassProfile p = exponential_profile(40, 5, 10.0);
  SynthParams params{8, 3.0, 1.0};
  LabeledDataset a = synth_gaussian_longtail(p, params, 7);
  LabeledDataset b = synth_gaussian_longtail(p, params, 7);
  CHECK(a.dim == 8);
  CHECK(a.class_count == 5);
  CHECK(a.size() == p.total());
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
  CHECK(a.profile().counts == p.counts);

  // Different noise stream: same labels (same counts), different inputs.
  LabeledDataset c = synth_gaussian_longtail(p, params, 7, 1);
  CHECK(c.labels == a.labels);
  CHECK(c.inputs != a.inputs);

  // Different seed moves the class means themselves.
  LabeledDataset d = synth_gaussian_longtail(p, params, 8);
  CHECK(d.inputs != a.inputs);
}

TEST_CASE("gaussian class means sit on the separation sphere") {
  auto means = gaussian_class_means(4, 6, 3.0, 13);
  REQUIRE(means.size() == 4);
  for (const auto& m : means) {
    REQUIRE(m.size() == 6);
    double n2 = 0.0;
    for (double v : m) n2 += v * v;
    CHECK(std::sqrt(n2) == doctest::Approx(3.0));
  }
}

TEST_CASE("synthetic classes are separable when separation is large") {
  ClassProfile p = exponential_profile(50, 3, 5.0);
  SynthParams params{8, 20.0, 0.5};
  LabeledDataset data = synth_gaussian_longtail(p, params, 3);
  auto means = gaussian_class_means(3, 8, 20.0, 3);
  // Nearest-mean classification should be perfect at this separation.
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float* x = data.input(i);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < 3; ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < 8; ++j) {
        double diff = x[j] - means[c][j];
        d2 += diff * diff;
      }
      if (d2 < best_d) {
        best_d = d2;
        best = c;
      }
    }
    REQUIRE(static_cast<std::int32_t>(best) == data.labels[i]);
  }
}

TEST_CASE("subsample_longtail draws without replacement per class") {
  ClassProfile source_p = exponential_profile(60, 4, 1.0);  // 60 each
  SynthParams params{4, 3.0, 1.0};
  LabeledDataset source = synth_gaussian_longtail(source_p, params, 21);

  ClassProfile target;
  target.counts = {30, 20, 10, 5};
  LabeledDataset sub = subsample_longtail(source, target, 22);
  CHECK(sub.profile().counts == target.counts);
  CHECK(sub.dim == source.dim);

  // No source row may be drawn twice (rows are distinct w.p. 1).
  std::set<std::vector<float>> seen;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    std::vector<float> row(sub.input(i), sub.input(i) + sub.dim);
    CHECK(seen.insert(row).second);
  }

  ClassProfile too_many;
  too_many.counts = {100, 1, 1, 1};
  CHECK_THROWS_AS(subsample_longtail(source, too_many, 22), ConfigError);
}

TEST_CASE("branch_probabilities") {
  ClassProfile p;
  p.counts = {100, 10, 1};
  auto bal = branch_probabilities(p, BranchKind::balanced);
  auto inst = branch_probabilities(p, BranchKind::instance);
  for (double v : bal) CHECK(v == doctest::Approx(1.0 / 3.0));
  CHECK(inst[0] == doctest::Approx(100.0 / 111.0));
  CHECK(inst[1] == doctest::Approx(10.0 / 111.0));
  CHECK(inst[2] == doctest::Approx(1.0 / 111.0));
}

TEST_CASE("samplers follow their branch law within 3 sigma") {
  ClassProfile p;
  p.counts = {100, 10, 1};
  SynthParams params{4, 3.0, 1.0};
  LabeledDataset data = synth_gaussian_longtail(p, params, 31);

  const std::size_t draws = 30000;
  for (BranchKind kind : {BranchKind::balanced, BranchKind::instance}) {
    IndexSampler sampler(data, kind, 17);
    std::vector<std::size_t> hits(3, 0);
    for (std::size_t i = 0; i < draws; ++i)
      ++hits[static_cast<std::size_t>(data.labels[sampler.next()])];
    auto probs = branch_probabilities(p, kind);
    for (std::size_t c = 0; c < 3; ++c) {
      double expect = draws * probs[c];
      double sigma = std::sqrt(draws * probs[c] * (1.0 - probs[c]));
      CHECK(std::abs(static_cast<double>(hits[c]) - expect) <= 3.0 * sigma);
    }
  }
}

TEST_CASE("sampler streams are seed-deterministic") {
  ClassProfile p;
  p.counts = {20, 5};
  LabeledDataset data = synth_gaussian_longtail(p, SynthParams{4, 3.0, 1.0}, 1);
  IndexSampler a(data, BranchKind::balanced, 7);
  IndexSampler b(data, BranchKind::balanced, 7);
  CHECK(a.next_batch(64) == b.next_batch(64));
  IndexSampler c(data, BranchKind::balanced, 8);
  CHECK(a.next_batch(64) != c.next_batch(64));
}

TEST_CASE("dataset disk round-trip is bitwise") {
  fs::path dir = temp_dir("dataset_io");
  ClassProfile p = exponential_profile(30, 4, 10.0);
  LabeledDataset data = synth_gaussian_longtail(p, SynthParams{6, 3.0, 1.0}, 5);
  save_dataset(data, dir / "ds");
  LabeledDataset back = load_dataset(dir / "ds");
  CHECK(back.dim == data.dim);
  CHECK(back.class_count == data.class_count);
  CHECK(back.seed == data.seed);
  CHECK(back.inputs == data.inputs);
  CHECK(back.labels == data.labels);
  CHECK_THROWS(load_dataset(dir / "missing"));
  fs::remove_all(dir);
}

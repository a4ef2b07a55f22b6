#include <cmath>
#include <vector>

#include "doctest.h"
#include "pih2t/h2tf.hpp"

using namespace pih2t;

TEST_CASE("cosine_distance hand values and guards") {
  CHECK(cosine_distance({1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(cosine_distance({1.0, 0.0}, {-1.0, 0.0}) == doctest::Approx(2.0));
  CHECK(cosine_distance({1.0, 0.0}, {1.0, 1.0}) ==
        doctest::Approx(0.29289321881345254));
  // Scale invariance.
  CHECK(cosine_distance({2.0, 4.0}, {0.5, 0.25}) ==
        doctest::Approx(cosine_distance({1.0, 2.0}, {2.0, 1.0})));
  CHECK_THROWS(cosine_distance({0.0, 0.0}, {1.0, 0.0}));
  CHECK_THROWS(cosine_distance({1.0, 0.0}, {0.0, 0.0}));
}

TEST_CASE("fusion_ratios min-max normalizes per batch") {
  // Classifier rows chosen so the distance of sample j is controlled by
  // its angle to the matching row.
  Matrix w(2, 2);
  w.at(0, 0) = 1.0;
  w.at(1, 1) = 1.0;
  std::vector<std::vector<double>> feats = {
      {1.0, 0.0},   // class 0, distance 0
      {1.0, 1.0},   // class 0, distance 1 - 1/sqrt(2)
      {-1.0, 0.5},  // class 0, largest distance
  };
  std::vector<std::int32_t> labels = {0, 0, 0};
  std::vector<double> r = fusion_ratios(feats, labels, w);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(0.0));
  CHECK(r[2] == doctest::Approx(1.0));
  CHECK(r[1] > 0.0);
  CHECK(r[1] < 1.0);
}

TEST_CASE("fusion_ratios frozen normalization example") {
  // Distances 0.1, 0.3, 0.5 must map to 0, 0.5, 1. Build features whose
  // cosine to the class row is 0.9, 0.7, 0.5.
  Matrix w(1, 2);
  w.at(0, 0) = 1.0;
  auto feat_with_cos = [](double c) {
    return std::vector<double>{c, std::sqrt(1.0 - c * c)};
  };
  std::vector<std::vector<double>> feats = {
      feat_with_cos(0.9), feat_with_cos(0.7), feat_with_cos(0.5)};
  std::vector<std::int32_t> labels = {0, 0, 0};
  std::vector<double> r = fusion_ratios(feats, labels, w);
  CHECK(r[0] == doctest::Approx(0.0));
  CHECK(r[1] == doctest::Approx(0.5));
  CHECK(r[2] == doctest::Approx(1.0));
}

TEST_CASE("degenerate distance range falls back to all ones") {
  Matrix w(1, 2);
  w.at(0, 0) = 1.0;
  std::vector<std::vector<double>> feats = {{2.0, 0.0}, {3.0, 0.0}};
  std::vector<std::int32_t> labels = {0, 0};
  std::vector<double> r = fusion_ratios(feats, labels, w);
  CHECK(r == std::vector<double>{1.0, 1.0});

  // Batch of one is always degenerate.
  std::vector<double> single =
      fusion_ratios({{1.0, 1.0}}, {0}, w);
  CHECK(single == std::vector<double>{1.0});
}

TEST_CASE("h2tf_fuse convex combination") {
  std::vector<double> fused = h2tf_fuse({1.0, 0.0}, {0.0, 1.0}, 0.25);
  CHECK(fused[0] == doctest::Approx(0.25));
  CHECK(fused[1] == doctest::Approx(0.75));

  CHECK(h2tf_fuse({2.0}, {5.0}, 1.0)[0] == doctest::Approx(2.0));
  CHECK(h2tf_fuse({2.0}, {5.0}, 0.0)[0] == doctest::Approx(5.0));
  CHECK_THROWS(h2tf_fuse({1.0}, {2.0}, 1.5));
  CHECK_THROWS(h2tf_fuse({1.0}, {2.0, 3.0}, 0.5));
}

TEST_CASE("couple_branches pairs positionally and keeps balanced labels") {
  Matrix w(2, 2);
  w.at(0, 0) = 1.0;
  w.at(1, 1) = 1.0;
  std::vector<std::vector<double>> fb = {{1.0, 0.0}, {1.0, 0.0}};
  std::vector<std::int32_t> lb = {0, 1};
  std::vector<std::vector<double>> fi = {{2.0, 3.0}, {4.0, 5.0}};
  FusedBatch out = couple_branches(fb, lb, fi, w);
  REQUIRE(out.size() == 2);
  // Sample 0 aligns perfectly with row 0 (distance 0 -> r = 0); sample 1 is
  // orthogonal to row 1 (distance 1 -> r = 1).
  CHECK(out.ratios[0] == doctest::Approx(0.0));
  CHECK(out.ratios[1] == doctest::Approx(1.0));
  CHECK(out.fused[0][0] == doctest::Approx(2.0));
  CHECK(out.fused[0][1] == doctest::Approx(3.0));
  CHECK(out.fused[1][0] == doctest::Approx(1.0));
  CHECK(out.fused[1][1] == doctest::Approx(0.0));
  CHECK(out.labels == std::vector<std::int32_t>{0, 1});

  CHECK_THROWS(couple_branches(fb, lb, {{1.0, 2.0}}, w));
}

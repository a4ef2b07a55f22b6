#include <cmath>
#include <vector>

#include "doctest.h"
#include "pih2t/backbone.hpp"
#include "pih2t/model.hpp"
#include "pih2t/rng.hpp"

using namespace pih2t;

namespace {

std::vector<float> random_input(std::size_t n, std::uint64_t seed) {
  std::vector<float> x(n);
  Rng rng(seed);
  for (float& v : x) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return x;
}

// Scalar loss: dot(output map, fixed direction).
double probe_loss(const Backbone& bb, const std::vector<float>& x,
                  const FeatureMap& direction) {
  FeatureMap out = bb.forward(x.data());
  double s = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k)
    s += out.data[k] * direction.data[k];
  return s;
}

void gradcheck(Backbone& bb, const std::vector<float>& x,
               std::uint64_t dir_seed) {
  FeatureMap probe = bb.forward(x.data());
  FeatureMap direction(probe.height, probe.width, probe.channels);
  Rng rng(dir_seed);
  for (double& v : direction.data) v = rng.uniform(-1.0, 1.0);

  Backbone::Cache cache;
  (void)bb.forward(x.data(), &cache);
  ParamSet grads = bb.zero_like();
  bb.backward(cache, direction, &grads);

  const double eps = 1e-6;
  std::size_t checked = 0;
  for (std::size_t layer = 0; layer < grads.w.size(); ++layer) {
    // Spot-check a spread of weights and all biases of small layers.
    std::size_t stride =
        std::max<std::size_t>(1, grads.w[layer].data.size() / 25);
    for (std::size_t i = 0; i < grads.w[layer].data.size(); i += stride) {
      double save = bb.params().w[layer].data[i];
      bb.params().w[layer].data[i] = save + eps;
      double up = probe_loss(bb, x, direction);
      bb.params().w[layer].data[i] = save - eps;
      double dn = probe_loss(bb, x, direction);
      bb.params().w[layer].data[i] = save;
      double num = (up - dn) / (2 * eps);
      REQUIRE(grads.w[layer].data[i] ==
              doctest::Approx(num).epsilon(1e-4).scale(1.0));
      ++checked;
    }
    for (std::size_t i = 0; i < grads.b[layer].size();
         i += std::max<std::size_t>(1, grads.b[layer].size() / 8)) {
      double save = bb.params().b[layer][i];
      bb.params().b[layer][i] = save + eps;
      double up = probe_loss(bb, x, direction);
      bb.params().b[layer][i] = save - eps;
      double dn = probe_loss(bb, x, direction);
      bb.params().b[layer][i] = save;
      double num = (up - dn) / (2 * eps);
      REQUIRE(grads.b[layer][i] ==
              doctest::Approx(num).epsilon(1e-4).scale(1.0));
      ++checked;
    }
  }
  CHECK(checked > 20);
}

}  // namespace

TEST_CASE("backbone spec validation and serialization") {
  BackboneSpec spec;
  spec.kind = BackboneSpec::Kind::mlp;
  spec.input_dim = 16;
  spec.hidden = {64, 32};
  spec.feature_dim = 24;
  spec.validate();
  CHECK(spec.out_height() == 1);
  CHECK(spec.out_width() == 1);
  CHECK(spec.out_channels() == 24);
  CHECK(spec.flat_input_size() == 16);
  BackboneSpec back = BackboneSpec::parse(spec.serialize());
  CHECK(back.serialize() == spec.serialize());

  BackboneSpec bad = spec;
  bad.input_dim = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  BackboneSpec cnn;
  cnn.kind = BackboneSpec::Kind::small_cnn;
  cnn.image_h = 8;
  cnn.image_w = 8;
  cnn.image_c = 3;
  cnn.conv_channels = {4, 8, 12};
  cnn.validate();
  CHECK(cnn.out_height() == 1);
  CHECK(cnn.out_width() == 1);
  CHECK(cnn.out_channels() == 12);
  CHECK(cnn.flat_input_size() == 8 * 8 * 3);
  CHECK(BackboneSpec::parse(cnn.serialize()).serialize() == cnn.serialize());

  BackboneSpec bad_cnn = cnn;
  bad_cnn.image_h = 12;  // not divisible by 8
  CHECK_THROWS_AS(bad_cnn.validate(), ConfigError);
  bad_cnn = cnn;
  bad_cnn.conv_channels = {4, 8};
  CHECK_THROWS_AS(bad_cnn.validate(), ConfigError);

  CHECK_THROWS(BackboneSpec::parse("garbage nonsense"));
}

TEST_CASE("mlp backbone gradcheck") {
  BackboneSpec spec;
  spec.kind = BackboneSpec::Kind::mlp;
  spec.input_dim = 7;
  spec.hidden = {11, 9};
  spec.feature_dim = 5;
  Rng rng(33);
  Backbone bb(spec, rng);
  auto x = random_input(7, 34);
  FeatureMap out = bb.forward(x.data());
  CHECK(out.height == 1);
  CHECK(out.width == 1);
  CHECK(out.channels == 5);
  gradcheck(bb, x, 35);
}

TEST_CASE("cnn backbone shape and gradcheck") {
  BackboneSpec spec;
  spec.kind = BackboneSpec::Kind::small_cnn;
  spec.image_h = 8;
  spec.image_w = 8;
  spec.image_c = 2;
  spec.conv_channels = {3, 4, 5};
  Rng rng(43);
  Backbone bb(spec, rng);
  auto x = random_input(spec.flat_input_size(), 44);
  FeatureMap out = bb.forward(x.data());
  CHECK(out.height == 1);
  CHECK(out.width == 1);
  CHECK(out.channels == 5);
  gradcheck(bb, x, 45);
}

TEST_CASE("backbone init is seed-deterministic") {
  BackboneSpec spec;
  spec.input_dim = 6;
  Rng r1(5), r2(5), r3(6);
  Backbone a(spec, r1), b(spec, r2), c(spec, r3);
  CHECK(a.params().w[0].data == b.params().w[0].data);
  CHECK(a.params().w[0].data != c.params().w[0].data);
}

TEST_CASE("mode names round-trip") {
  for (Mode m : {Mode::ce_baseline, Mode::dr_baseline, Mode::pi_h2t})
    CHECK(parse_mode(mode_name(m)) == m);
  CHECK_THROWS_AS(parse_mode("bogus"), ConfigError);
}

TEST_CASE("init_model shares backbone and classifier init across modes") {
  BackboneSpec spec;
  spec.input_dim = 12;
  spec.hidden = {16};
  spec.feature_dim = 8;
  Rng r1(77), r2(77);
  Model plain = init_model(spec, 5, /*use_pif=*/false, r1);
  Model fused = init_model(spec, 5, /*use_pif=*/true, r2);
  CHECK_FALSE(plain.use_pif);
  CHECK(fused.use_pif);
  for (std::size_t l = 0; l < plain.backbone.params().w.size(); ++l)
    CHECK(plain.backbone.params().w[l].data ==
          fused.backbone.params().w[l].data);
  CHECK(plain.classifier.data == fused.classifier.data);
  // Fresh fusion layer is the identity, so the two models agree everywhere.
  auto x = random_input(12, 78);
  auto fp = plain.pooled_feature(x.data());
  auto ff = fused.pooled_feature(x.data());
  for (std::size_t i = 0; i < fp.size(); ++i) REQUIRE(fp[i] == ff[i]);
}

TEST_CASE("model predicts the argmax of its logits") {
  BackboneSpec spec;
  spec.input_dim = 4;
  spec.hidden = {6};
  spec.feature_dim = 3;
  Rng rng(55);
  Model m = init_model(spec, 4, true, rng);
  auto x = random_input(4, 56);
  auto f = m.pooled_feature(x.data());
  auto logits = m.logits_of(f);
  REQUIRE(logits.size() == 4);
  std::size_t best = 0;
  for (std::size_t c = 1; c < 4; ++c)
    if (logits[c] > logits[best]) best = c;
  CHECK(m.predict_one(x.data()) == static_cast<std::int32_t>(best));
}

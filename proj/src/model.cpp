#include "pih2t/model.hpp"

#include <cmath>

#include "pih2t/common.hpp"

namespace pih2t {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::ce_baseline: return "ce_baseline";
    case Mode::dr_baseline: return "dr_baseline";
    case Mode::pi_h2t: return "pi_h2t";
  }
  throw std::logic_error("mode_name: bad mode");
}

Mode parse_mode(const std::string& name) {
  if (name == "ce_baseline") return Mode::ce_baseline;
  if (name == "dr_baseline") return Mode::dr_baseline;
  if (name == "pi_h2t") return Mode::pi_h2t;
  throw ConfigError("unknown mode '" + name +
                    "' (expected ce_baseline, dr_baseline, or pi_h2t)");
}

FeatureMap Model::feature_map(const float* x) const {
  FeatureMap map = backbone.forward(x);
  if (use_pif) return pif_fuse(map, pif);
  return map;
}

std::vector<double> Model::pooled_feature(const float* x) const {
  return pooled_representation(feature_map(x));
}

std::vector<double> Model::logits_of(const std::vector<double>& f) const {
  std::vector<double> z(classifier.rows);
  for (std::size_t r = 0; r < classifier.rows; ++r)
    z[r] = dot(classifier.row(r), f.data(), classifier.cols);
  return z;
}

std::int32_t Model::predict_one(const float* x) const {
  std::vector<double> z = logits_of(pooled_feature(x));
  std::size_t arg = 0;
  for (std::size_t c = 1; c < z.size(); ++c)
    if (z[c] > z[arg]) arg = c;
  return static_cast<std::int32_t>(arg);
}

std::vector<std::int32_t> Model::predict(const LabeledDataset& data) const {
  std::vector<std::int32_t> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out[i] = predict_one(data.input(i));
  return out;
}

Model init_model(const BackboneSpec& spec, std::size_t class_count,
                 bool use_pif, Rng& rng) {
  if (class_count < 2) throw ConfigError("model: need at least 2 classes");
  Model m;
  Rng backbone_rng = rng.fork(0x6261636bull);    // "back"
  Rng classifier_rng = rng.fork(0x636c6173ull);  // "clas"
  m.backbone = Backbone(spec, backbone_rng);
  m.use_pif = use_pif;
  m.pif = init_pif_params(spec.out_channels());
  m.classifier = Matrix(class_count, spec.out_channels());
  double stddev = std::sqrt(1.0 / static_cast<double>(spec.out_channels()));
  for (double& v : m.classifier.data) v = classifier_rng.normal(0.0, stddev);
  return m;
}

}  // namespace pih2t

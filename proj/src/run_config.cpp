#include "pih2t/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "pih2t/common.hpp"

namespace pih2t {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

std::size_t parse_size(const std::string& key, const std::string& v);

std::vector<std::size_t> parse_list(const std::string& key,
                                    const std::string& v) {
  std::vector<std::size_t> out;
  std::istringstream is(v);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(parse_size(key, tok));
  }
  return out;
}

std::string join_list(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size() || x < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    std::uint64_t x = std::stoull(v, &used);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

long long parse_ll(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

}  // namespace

ClassProfile RunConfig::build_profile() const {
  if (profile == "exponential")
    return exponential_profile(base_count, class_count, imbalance);
  if (profile == "pareto")
    return pareto_profile(base_count, pareto_tail, class_count, pareto_alpha);
  throw ConfigError("config: unknown profile '" + profile + "'");
}

PartitionSpec RunConfig::partition_spec() const {
  PartitionSpec s;
  s.head_min = head_min;
  s.tail_max = tail_max;
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.mode = mode;
  t.stage1_epochs = stage1_epochs;
  t.stage2_epochs = stage2_epochs;
  t.batch_size = batch_size;
  t.lr = lr;
  t.momentum = momentum;
  t.decay_epochs = decay_epochs;
  t.decay_factor = decay_factor;
  t.stage2_lr = stage2_lr;
  t.stage2_reset_classifier = stage2_reset_classifier;
  t.stage2_freeze_ratio_weights = stage2_freeze_ratio_weights;
  t.stage2_force_unit_ratio = stage2_force_unit_ratio;
  t.seed = seed;
  t.partition = partition_spec();
  return t;
}

BackboneSpec RunConfig::backbone_spec(std::size_t input_dim) const {
  BackboneSpec s;
  if (backbone == "mlp") {
    s.kind = BackboneSpec::Kind::mlp;
    s.input_dim = input_dim;
    s.hidden = hidden;
    s.feature_dim = feature_dim;
  } else if (backbone == "small_cnn") {
    s.kind = BackboneSpec::Kind::small_cnn;
    s.image_h = image_h;
    s.image_w = image_w;
    s.image_c = image_c;
    s.conv_channels = conv_channels;
    if (s.image_h * s.image_w * s.image_c != input_dim)
      throw ConfigError(
          "config: image dimensions do not match the dataset row size");
  } else {
    throw ConfigError("config: unknown backbone '" + backbone + "'");
  }
  s.validate();
  return s;
}

SynthParams RunConfig::synth_params() const {
  SynthParams p;
  p.dim = dim;
  p.mean_separation = mean_separation;
  p.noise_scale = noise_scale;
  return p;
}

Projector RunConfig::projector_kind() const {
  if (projector == "none") return Projector::none;
  if (projector == "pca2d") return Projector::pca2d;
  throw ConfigError("config: unknown projector '" + projector + "'");
}

std::string RunConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["mode"] = mode_name(mode);
  kv["seed"] = std::to_string(seed);
  kv["data_dir"] = data_dir;
  kv["stage1_epochs"] = std::to_string(stage1_epochs);
  kv["stage2_epochs"] = std::to_string(stage2_epochs);
  kv["batch_size"] = std::to_string(batch_size);
  kv["lr"] = format_double(lr);
  kv["momentum"] = format_double(momentum);
  kv["decay_epochs"] = join_list(decay_epochs);
  kv["decay_factor"] = format_double(decay_factor);
  kv["stage2_lr"] = format_double(stage2_lr);
  kv["stage2_reset_classifier"] = stage2_reset_classifier ? "true" : "false";
  kv["stage2_freeze_ratio_weights"] =
      stage2_freeze_ratio_weights ? "true" : "false";
  kv["stage2_force_unit_ratio"] = stage2_force_unit_ratio ? "true" : "false";
  kv["backbone"] = backbone;
  kv["hidden"] = join_list(hidden);
  kv["feature_dim"] = std::to_string(feature_dim);
  kv["conv_channels"] = join_list(conv_channels);
  kv["image"] = std::to_string(image_h) + "x" + std::to_string(image_w) +
                "x" + std::to_string(image_c);
  kv["head_min"] = std::to_string(head_min);
  kv["tail_max"] = std::to_string(tail_max);
  kv["profile"] = profile;
  kv["class_count"] = std::to_string(class_count);
  kv["base_count"] = std::to_string(base_count);
  kv["imbalance"] = format_double(imbalance);
  kv["pareto_tail"] = std::to_string(pareto_tail);
  kv["pareto_alpha"] = format_double(pareto_alpha);
  kv["dim"] = std::to_string(dim);
  kv["mean_separation"] = format_double(mean_separation);
  kv["noise_scale"] = format_double(noise_scale);
  kv["test_per_class"] = std::to_string(test_per_class);
  kv["oracle_trials"] = std::to_string(oracle_trials);
  kv["oracle_dims"] = join_list(oracle_dims);
  kv["projector"] = projector;
  kv["boundary_class_a"] = std::to_string(boundary_class_a);
  kv["boundary_class_b"] = std::to_string(boundary_class_b);

  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_text()); }

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') continue;  // section header
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));

    if (key == "mode") cfg.mode = parse_mode(val);
    else if (key == "seed") cfg.seed = parse_u64(key, val);
    else if (key == "data_dir") cfg.data_dir = val;
    else if (key == "stage1_epochs") cfg.stage1_epochs = parse_size(key, val);
    else if (key == "stage2_epochs") cfg.stage2_epochs = parse_size(key, val);
    else if (key == "batch_size") cfg.batch_size = parse_size(key, val);
    else if (key == "lr") cfg.lr = parse_double(key, val);
    else if (key == "momentum") cfg.momentum = parse_double(key, val);
    else if (key == "decay_epochs") cfg.decay_epochs = parse_list(key, val);
    else if (key == "decay_factor") cfg.decay_factor = parse_double(key, val);
    else if (key == "stage2_lr") cfg.stage2_lr = parse_double(key, val);
    else if (key == "stage2_reset_classifier")
      cfg.stage2_reset_classifier = parse_bool(key, val);
    else if (key == "stage2_freeze_ratio_weights")
      cfg.stage2_freeze_ratio_weights = parse_bool(key, val);
    else if (key == "stage2_force_unit_ratio")
      cfg.stage2_force_unit_ratio = parse_bool(key, val);
    else if (key == "backbone") cfg.backbone = val;
    else if (key == "hidden") cfg.hidden = parse_list(key, val);
    else if (key == "feature_dim") cfg.feature_dim = parse_size(key, val);
    else if (key == "conv_channels") cfg.conv_channels = parse_list(key, val);
    else if (key == "image") {
      auto a = val.find('x');
      auto b = val.find('x', a + 1);
      if (a == std::string::npos || b == std::string::npos)
        throw ConfigError("config: image must be HxWxC");
      cfg.image_h = parse_size(key, val.substr(0, a));
      cfg.image_w = parse_size(key, val.substr(a + 1, b - a - 1));
      cfg.image_c = parse_size(key, val.substr(b + 1));
    }
    else if (key == "head_min") cfg.head_min = parse_size(key, val);
    else if (key == "tail_max") cfg.tail_max = parse_size(key, val);
    else if (key == "profile") cfg.profile = val;
    else if (key == "class_count") cfg.class_count = parse_size(key, val);
    else if (key == "base_count") cfg.base_count = parse_size(key, val);
    else if (key == "imbalance") cfg.imbalance = parse_double(key, val);
    else if (key == "pareto_tail") cfg.pareto_tail = parse_size(key, val);
    else if (key == "pareto_alpha") cfg.pareto_alpha = parse_double(key, val);
    else if (key == "dim") cfg.dim = parse_size(key, val);
    else if (key == "mean_separation")
      cfg.mean_separation = parse_double(key, val);
    else if (key == "noise_scale") cfg.noise_scale = parse_double(key, val);
    else if (key == "test_per_class")
      cfg.test_per_class = parse_size(key, val);
    else if (key == "oracle_trials") cfg.oracle_trials = parse_size(key, val);
    else if (key == "oracle_dims") cfg.oracle_dims = parse_list(key, val);
    else if (key == "projector") cfg.projector = val;
    else if (key == "boundary_class_a") cfg.boundary_class_a = parse_ll(key, val);
    else if (key == "boundary_class_b") cfg.boundary_class_b = parse_ll(key, val);
    else
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

}  // namespace pih2t

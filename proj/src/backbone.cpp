#include "pih2t/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pih2t/common.hpp"

namespace pih2t {

namespace {

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) out.push_back(std::stoull(tok));
  return out;
}

std::string join_size_list(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

}  // namespace

std::size_t BackboneSpec::out_height() const {
  return kind == Kind::mlp ? 1 : image_h / 8;
}
std::size_t BackboneSpec::out_width() const {
  return kind == Kind::mlp ? 1 : image_w / 8;
}
std::size_t BackboneSpec::out_channels() const {
  return kind == Kind::mlp ? feature_dim : conv_channels.back();
}
std::size_t BackboneSpec::flat_input_size() const {
  return kind == Kind::mlp ? input_dim : image_h * image_w * image_c;
}

void BackboneSpec::validate() const {
  if (kind == Kind::mlp) {
    if (input_dim == 0) throw ConfigError("backbone: input_dim must be >= 1");
    if (feature_dim == 0) throw ConfigError("backbone: feature_dim must be >= 1");
  } else {
    if (image_h == 0 || image_w == 0 || image_c == 0)
      throw ConfigError("backbone: image dimensions must be positive");
    if (image_h % 8 != 0 || image_w % 8 != 0)
      throw ConfigError("backbone: image sides must be divisible by 8 "
                        "(three 2x2 pooling stages)");
    if (conv_channels.size() != 3)
      throw ConfigError("backbone: small_cnn needs exactly 3 channel widths");
    for (std::size_t c : conv_channels)
      if (c == 0) throw ConfigError("backbone: zero conv width");
  }
}

std::string BackboneSpec::serialize() const {
  std::ostringstream os;
  if (kind == Kind::mlp) {
    os << "mlp input=" << input_dim << " hidden=" << join_size_list(hidden)
       << " feature=" << feature_dim;
  } else {
    os << "small_cnn image=" << image_h << 'x' << image_w << 'x' << image_c
       << " channels=" << join_size_list(conv_channels);
  }
  return os.str();
}

BackboneSpec BackboneSpec::parse(const std::string& text) {
  std::istringstream is(text);
  std::string kind_tok;
  is >> kind_tok;
  BackboneSpec spec;
  if (kind_tok == "mlp")
    spec.kind = Kind::mlp;
  else if (kind_tok == "small_cnn")
    spec.kind = Kind::small_cnn;
  else
    throw ConfigError("backbone spec: unknown kind '" + kind_tok + "'");

  std::string tok;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw ConfigError("backbone spec: bad token '" + tok + "'");
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "input") {
      spec.input_dim = std::stoull(val);
    } else if (key == "hidden") {
      spec.hidden = parse_size_list(val);
    } else if (key == "feature") {
      spec.feature_dim = std::stoull(val);
    } else if (key == "image") {
      std::size_t a = 0, b = 0;
      a = val.find('x');
      b = val.find('x', a + 1);
      if (a == std::string::npos || b == std::string::npos)
        throw ConfigError("backbone spec: image must be HxWxC");
      spec.image_h = std::stoull(val.substr(0, a));
      spec.image_w = std::stoull(val.substr(a + 1, b - a - 1));
      spec.image_c = std::stoull(val.substr(b + 1));
    } else if (key == "channels") {
      spec.conv_channels = parse_size_list(val);
    } else {
      throw ConfigError("backbone spec: unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

void ParamSet::scale_to_zero() {
  for (auto& m : w) std::fill(m.data.begin(), m.data.end(), 0.0);
  for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& m : w) n += m.data.size();
  for (const auto& v : b) n += v.size();
  return n;
}

Backbone::Backbone(const BackboneSpec& spec, Rng& rng) : spec_(spec) {
  spec.validate();
  auto init_layer = [&](std::size_t out, std::size_t in, bool relu_follows) {
    Matrix m(out, in);
    // He scaling before a ReLU, plain 1/fan_in for the final linear layer.
    double stddev = std::sqrt((relu_follows ? 2.0 : 1.0) /
                              static_cast<double>(in));
    for (double& x : m.data) x = rng.normal(0.0, stddev);
    params_.w.push_back(std::move(m));
    params_.b.emplace_back(out, 0.0);
  };

  if (spec.kind == BackboneSpec::Kind::mlp) {
    std::size_t prev = spec.input_dim;
    for (std::size_t hdim : spec.hidden) {
      init_layer(hdim, prev, true);
      prev = hdim;
    }
    init_layer(spec.feature_dim, prev, false);
  } else {
    std::size_t prev = spec.image_c;
    for (std::size_t oc : spec.conv_channels) {
      init_layer(oc, prev * 9, true);
      prev = oc;
    }
  }
}

ParamSet Backbone::zero_like() const {
  ParamSet z;
  for (const auto& m : params_.w) z.w.emplace_back(m.rows, m.cols);
  for (const auto& v : params_.b) z.b.emplace_back(v.size(), 0.0);
  return z;
}

FeatureMap Backbone::forward(const float* x, Cache* cache) const {
  return spec_.kind == BackboneSpec::Kind::mlp ? forward_mlp(x, cache)
                                               : forward_cnn(x, cache);
}

void Backbone::backward(const Cache& cache, const FeatureMap& grad_map,
                        ParamSet* grads) const {
  if (spec_.kind == BackboneSpec::Kind::mlp)
    backward_mlp(cache, grad_map, grads);
  else
    backward_cnn(cache, grad_map, grads);
}

FeatureMap Backbone::forward_mlp(const float* x, Cache* cache) const {
  std::vector<double> cur(spec_.input_dim);
  for (std::size_t i = 0; i < spec_.input_dim; ++i)
    cur[i] = static_cast<double>(x[i]);
  if (cache) {
    cache->input = cur;
    cache->pre.clear();
    cache->post.clear();
  }

  for (std::size_t l = 0; l < params_.w.size(); ++l) {
    const Matrix& W = params_.w[l];
    std::vector<double> next(W.rows);
    for (std::size_t r = 0; r < W.rows; ++r)
      next[r] = params_.b[l][r] + dot(W.row(r), cur.data(), W.cols);
    bool last = l + 1 == params_.w.size();
    if (cache) cache->pre.push_back(next);
    if (!last)
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    if (cache) cache->post.push_back(next);
    cur = std::move(next);
  }

  FeatureMap out(1, 1, spec_.feature_dim);
  out.data = std::move(cur);
  return out;
}

void Backbone::backward_mlp(const Cache& cache, const FeatureMap& grad_map,
                            ParamSet* grads) const {
  std::vector<double> g = grad_map.data;  // gradient w.r.t. layer output
  for (std::size_t li = params_.w.size(); li-- > 0;) {
    const Matrix& W = params_.w[li];
    bool last = li + 1 == params_.w.size();
    if (!last) {
      // Through ReLU: zero where the pre-activation was non-positive.
      for (std::size_t r = 0; r < g.size(); ++r)
        if (cache.pre[li][r] <= 0.0) g[r] = 0.0;
    }
    const std::vector<double>& in =
        li == 0 ? cache.input : cache.post[li - 1];
    Matrix& gw = grads->w[li];
    for (std::size_t r = 0; r < W.rows; ++r) {
      grads->b[li][r] += g[r];
      double* grow = gw.row(r);
      for (std::size_t c = 0; c < W.cols; ++c) grow[c] += g[r] * in[c];
    }
    if (li == 0) break;
    std::vector<double> gin(W.cols, 0.0);
    for (std::size_t r = 0; r < W.rows; ++r) {
      const double* wrow = W.row(r);
      for (std::size_t c = 0; c < W.cols; ++c) gin[c] += g[r] * wrow[c];
    }
    g = std::move(gin);
  }
}

namespace {

// 3x3 same-padding convolution.
FeatureMap conv3x3(const FeatureMap& in, const Matrix& w,
                   const std::vector<double>& bias) {
  std::size_t out_c = w.rows, in_c = in.channels;
  FeatureMap out(in.height, in.width, out_c);
  for (std::size_t u = 0; u < in.height; ++u)
    for (std::size_t v = 0; v < in.width; ++v)
      for (std::size_t oc = 0; oc < out_c; ++oc) {
        double s = bias[oc];
        const double* wrow = w.row(oc);
        for (std::size_t du = 0; du < 3; ++du) {
          std::size_t uu = u + du;
          if (uu < 1 || uu > in.height) continue;  // zero padding
          --uu;
          for (std::size_t dv = 0; dv < 3; ++dv) {
            std::size_t vv = v + dv;
            if (vv < 1 || vv > in.width) continue;
            --vv;
            const double* px = in.data.data() + (uu * in.width + vv) * in_c;
            const double* wk = wrow + (du * 3 + dv) * in_c;
            for (std::size_t ic = 0; ic < in_c; ++ic) s += wk[ic] * px[ic];
          }
        }
        out.at(u, v, oc) = s;
      }
  return out;
}

FeatureMap avgpool2x2(const FeatureMap& in) {
  FeatureMap out(in.height / 2, in.width / 2, in.channels);
  for (std::size_t u = 0; u < out.height; ++u)
    for (std::size_t v = 0; v < out.width; ++v)
      for (std::size_t c = 0; c < in.channels; ++c)
        out.at(u, v, c) = 0.25 * (in.at(2 * u, 2 * v, c) +
                                  in.at(2 * u, 2 * v + 1, c) +
                                  in.at(2 * u + 1, 2 * v, c) +
                                  in.at(2 * u + 1, 2 * v + 1, c));
  return out;
}

FeatureMap avgpool2x2_backward(const FeatureMap& grad_out,
                               std::size_t in_h, std::size_t in_w) {
  FeatureMap g(in_h, in_w, grad_out.channels);
  for (std::size_t u = 0; u < grad_out.height; ++u)
    for (std::size_t v = 0; v < grad_out.width; ++v)
      for (std::size_t c = 0; c < grad_out.channels; ++c) {
        double gv = 0.25 * grad_out.at(u, v, c);
        g.at(2 * u, 2 * v, c) = gv;
        g.at(2 * u, 2 * v + 1, c) = gv;
        g.at(2 * u + 1, 2 * v, c) = gv;
        g.at(2 * u + 1, 2 * v + 1, c) = gv;
      }
  return g;
}

}  // namespace

FeatureMap Backbone::forward_cnn(const float* x, Cache* cache) const {
  FeatureMap cur(spec_.image_h, spec_.image_w, spec_.image_c);
  for (std::size_t i = 0; i < cur.data.size(); ++i)
    cur.data[i] = static_cast<double>(x[i]);
  if (cache) {
    cache->conv_in.clear();
    cache->conv_pre.clear();
    cache->conv_post.clear();
  }

  for (std::size_t l = 0; l < params_.w.size(); ++l) {
    if (cache) cache->conv_in.push_back(cur);
    FeatureMap pre = conv3x3(cur, params_.w[l], params_.b[l]);
    if (cache) cache->conv_pre.push_back(pre);
    for (double& v : pre.data) v = v > 0.0 ? v : 0.0;
    if (cache) cache->conv_post.push_back(pre);
    cur = avgpool2x2(pre);
  }
  return cur;
}

void Backbone::backward_cnn(const Cache& cache, const FeatureMap& grad_map,
                            ParamSet* grads) const {
  FeatureMap g = grad_map;
  for (std::size_t li = params_.w.size(); li-- > 0;) {
    const FeatureMap& post = cache.conv_post[li];
    FeatureMap g_post = avgpool2x2_backward(g, post.height, post.width);
    // Through ReLU
    const FeatureMap& pre = cache.conv_pre[li];
    for (std::size_t i = 0; i < g_post.data.size(); ++i)
      if (pre.data[i] <= 0.0) g_post.data[i] = 0.0;

    const FeatureMap& in = cache.conv_in[li];
    const Matrix& w = params_.w[li];
    Matrix& gw = grads->w[li];
    std::vector<double>& gb = grads->b[li];
    FeatureMap g_in(in.height, in.width, in.channels);

    for (std::size_t u = 0; u < in.height; ++u)
      for (std::size_t v = 0; v < in.width; ++v)
        for (std::size_t oc = 0; oc < w.rows; ++oc) {
          double go = g_post.at(u, v, oc);
          if (go == 0.0) continue;
          gb[oc] += go;
          double* gwrow = gw.row(oc);
          const double* wrow = w.row(oc);
          for (std::size_t du = 0; du < 3; ++du) {
            std::size_t uu = u + du;
            if (uu < 1 || uu > in.height) continue;
            --uu;
            for (std::size_t dv = 0; dv < 3; ++dv) {
              std::size_t vv = v + dv;
              if (vv < 1 || vv > in.width) continue;
              --vv;
              const double* px = in.data.data() + (uu * in.width + vv) * in.channels;
              double* gpx = g_in.data.data() + (uu * in.width + vv) * in.channels;
              std::size_t base = (du * 3 + dv) * in.channels;
              for (std::size_t ic = 0; ic < in.channels; ++ic) {
                gwrow[base + ic] += go * px[ic];
                gpx[ic] += go * wrow[base + ic];
              }
            }
          }
        }
    g = std::move(g_in);
  }
}

}  // namespace pih2t

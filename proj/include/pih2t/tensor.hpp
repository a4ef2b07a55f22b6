#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pih2t {

// Dense H x W x C map, channel-fastest. A plain feature vector is the H=W=1
// special case, which lets the fusion layer treat both uniformly.
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(std::size_t h, std::size_t w, std::size_t c)
      : height(h), width(w), channels(c), data(h * w * c, 0.0) {}

  static FeatureMap from_vector(const std::vector<double>& v) {
    FeatureMap m(1, 1, v.size());
    m.data = v;
    return m;
  }

  std::size_t locations() const { return height * width; }
  std::size_t size() const { return data.size(); }

  double& at(std::size_t u, std::size_t v, std::size_t c) {
    return data[(u * width + v) * channels + c];
  }
  double at(std::size_t u, std::size_t v, std::size_t c) const {
    return data[(u * width + v) * channels + c];
  }

  bool same_shape(const FeatureMap& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  void require_same_shape(const FeatureMap& o, const char* where) const {
    if (!same_shape(o))
      throw std::invalid_argument(std::string(where) + ": shape mismatch");
  }
};

// Row-major matrix, used for classifier weights and small dense layers.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }
};

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  return dot(a.data(), b.data(), a.size());
}

inline double norm2(const std::vector<double>& a) {
  return std::sqrt(dot(a.data(), a.data(), a.size()));
}

}  // namespace pih2t

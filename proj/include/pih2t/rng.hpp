#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pih2t/common.hpp"

namespace pih2t {

// Deterministic RNG wrapper. All sampling goes through the hand-rolled
// transforms below (never std::uniform_* distributions) so a given seed
// produces the same stream on every platform / standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // Independent generator for a named sub-purpose. Forks derive from the
  // construction seed, not the current stream position, so fork order cannot
  // perturb results.
  Rng fork(std::uint64_t salt) const { return Rng(mix_seed(seed_, salt)); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection sampled to keep the stream unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Standard normal via Box-Muller. One value per call (no cached spare) so
  // interleaved consumers cannot perturb each other's streams.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::string state_string() const {
    std::ostringstream os;
    os << seed_ << ' ' << engine_;
    return os.str();
  }

  void restore_state(const std::string& state) {
    std::istringstream is(state);
    is >> seed_ >> engine_;
    if (is.fail()) throw std::runtime_error("Rng: bad serialized state");
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace pih2t

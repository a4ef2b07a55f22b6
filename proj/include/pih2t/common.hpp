#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pih2t {

// Raised for malformed configuration / bad user parameters. The CLI maps this
// to exit code 1; every other exception maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a, used to stamp a config hash into every artifact.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex_u64(std::uint64_t value);

// Shortest round-trip decimal form. All CSV/JSON writers go through this so
// reruns produce byte-identical files.
std::string format_double(double value);

// Seed mixing for derived RNG streams (SplitMix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace pih2t

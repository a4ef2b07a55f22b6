#include "pih2t/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pih2t/common.hpp"

namespace pih2t {

std::size_t ClassProfile::total() const {
  std::size_t n = 0;
  for (std::size_t c : counts) n += c;
  return n;
}

double ClassProfile::imbalance_ratio() const {
  if (counts.empty()) throw ConfigError("profile: empty");
  auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
  if (*mn == 0) throw ConfigError("profile: class with zero items");
  return static_cast<double>(*mx) / static_cast<double>(*mn);
}

ClassProfile exponential_profile(std::size_t base, std::size_t class_count,
                                 double imbalance) {
  if (class_count == 0) throw ConfigError("exponential_profile: class_count must be positive");
  if (base == 0) throw ConfigError("exponential_profile: base must be positive");
  if (imbalance < 1.0) throw ConfigError("exponential_profile: imbalance must be >= 1");

  ClassProfile p;
  p.counts.resize(class_count);
  if (class_count == 1 || imbalance == 1.0) {
    std::fill(p.counts.begin(), p.counts.end(), base);
    return p;
  }
  double lambda =
      std::pow(imbalance, -1.0 / static_cast<double>(class_count - 1));
  for (std::size_t i = 0; i < class_count; ++i) {
    double raw = static_cast<double>(base) *
                 std::pow(lambda, static_cast<double>(i));
    auto n = static_cast<long long>(std::llround(raw));
    if (n < 1)
      throw ConfigError(
          "exponential_profile: tail class would round to zero items "
          "(base too small for requested imbalance)");
    p.counts[i] = static_cast<std::size_t>(n);
  }
  return p;
}

ClassProfile pareto_profile(std::size_t base, std::size_t tail,
                            std::size_t class_count, double alpha) {
  if (class_count < 2)
    throw ConfigError(
        "pareto_profile: needs at least two classes to pin both endpoints");
  if (base == 0 || tail == 0) throw ConfigError("pareto_profile: base and tail must be positive");
  if (tail > base) throw ConfigError("pareto_profile: tail larger than base");
  if (alpha <= 0.0) throw ConfigError("pareto_profile: alpha must be positive");

  ClassProfile p;
  p.counts.resize(class_count);
  // Raw power-law shape, then pin the endpoints to (base, tail) with a
  // linear rescale so the requested extremes hold exactly.
  double s0 = 1.0;  // (1+0)^(-1/alpha)
  double sl = std::pow(static_cast<double>(class_count), -1.0 / alpha);
  for (std::size_t i = 0; i < class_count; ++i) {
    double s = std::pow(static_cast<double>(i + 1), -1.0 / alpha);
    double t = (s0 - s) / (s0 - sl);  // 0 at head, 1 at last class
    double raw = static_cast<double>(base) +
                 t * (static_cast<double>(tail) - static_cast<double>(base));
    auto n = static_cast<long long>(std::llround(raw));
    if (n < 1) throw ConfigError("pareto_profile: class rounds to zero items");
    p.counts[i] = static_cast<std::size_t>(n);
  }
  return p;
}

Partition partition_classes(const ClassProfile& profile,
                            const PartitionSpec& spec) {
  if (spec.tail_max >= spec.head_min)
    throw ConfigError("partition: tail_max must be below head_min");
  Partition part;
  part.group_of.resize(profile.class_count());
  for (std::size_t i = 0; i < profile.class_count(); ++i) {
    std::size_t n = profile.counts[i];
    if (n > spec.head_min) {
      part.head.push_back(i);
      part.group_of[i] = 0;
    } else if (n > spec.tail_max) {
      part.medium.push_back(i);
      part.group_of[i] = 1;
    } else {
      part.tail.push_back(i);
      part.group_of[i] = 2;
    }
  }
  return part;
}

void save_profile_csv(const ClassProfile& profile,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "class_index,count\n";
  for (std::size_t i = 0; i < profile.counts.size(); ++i)
    out << i << ',' << profile.counts[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ClassProfile load_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("class_index,count", 0) != 0)
    throw ConfigError("profile csv: bad header in " + path.string());
  ClassProfile p;
  std::size_t expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string idx, cnt;
    if (!std::getline(row, idx, ',') || !std::getline(row, cnt))
      throw ConfigError("profile csv: bad row: " + line);
    if (static_cast<std::size_t>(std::stoull(idx)) != expect)
      throw ConfigError("profile csv: rows out of order in " + path.string());
    p.counts.push_back(static_cast<std::size_t>(std::stoull(cnt)));
    ++expect;
  }
  if (p.counts.empty()) throw ConfigError("profile csv: no rows in " + path.string());
  return p;
}

}  // namespace pih2t

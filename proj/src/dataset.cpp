#include "pih2t/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "pih2t/common.hpp"

namespace pih2t {

namespace {

constexpr std::uint64_t kMeansSalt = 0x6d65616e73ull;    // "means"
constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ull;    // "noise"
constexpr std::uint64_t kSubsampleSalt = 0x737562ull;    // "sub"

void write_exact(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

}  // namespace

ClassProfile LabeledDataset::profile() const {
  ClassProfile p;
  p.counts.assign(class_count, 0);
  for (std::int32_t y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= class_count)
      throw std::runtime_error("dataset: label out of range");
    ++p.counts[static_cast<std::size_t>(y)];
  }
  return p;
}

std::vector<std::vector<std::size_t>> LabeledDataset::indices_by_class() const {
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  return by_class;
}

std::vector<std::vector<double>> gaussian_class_means(std::size_t class_count,
                                                      std::size_t dim,
                                                      double mean_separation,
                                                      std::uint64_t seed) {
  if (dim < 2) throw ConfigError("synth: dim must be >= 2");
  if (mean_separation <= 0.0)
    throw ConfigError("synth: mean_separation must be positive");
  Rng rng(mix_seed(seed, kMeansSalt));
  std::vector<std::vector<double>> means(class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    std::vector<double> v(dim);
    double norm = 0.0;
    // Rejection on near-zero norm keeps normalization well defined; in
    // practice a Gaussian draw virtually never triggers it.
    do {
      norm = 0.0;
      for (double& x : v) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (double& x : v) x = x / norm * mean_separation;
    means[c] = std::move(v);
  }
  return means;
}

LabeledDataset synth_gaussian_longtail(const ClassProfile& profile,
                                       const SynthParams& params,
                                       std::uint64_t seed,
                                       std::uint64_t noise_stream) {
  if (params.noise_scale <= 0.0)
    throw ConfigError("synth: noise_scale must be positive");
  auto means = gaussian_class_means(profile.class_count(), params.dim,
                                    params.mean_separation, seed);
  LabeledDataset ds;
  ds.dim = params.dim;
  ds.class_count = profile.class_count();
  ds.seed = seed;
  ds.inputs.reserve(profile.total() * params.dim);
  ds.labels.reserve(profile.total());
  Rng noise(mix_seed(mix_seed(seed, kNoiseSalt), noise_stream));
  for (std::size_t c = 0; c < profile.class_count(); ++c) {
    for (std::size_t k = 0; k < profile.counts[c]; ++k) {
      for (std::size_t j = 0; j < params.dim; ++j) {
        double x = means[c][j] + params.noise_scale * noise.normal();
        // Round at generation time: the dataset *is* float32 data.
        ds.inputs.push_back(static_cast<float>(x));
      }
      ds.labels.push_back(static_cast<std::int32_t>(c));
    }
  }
  return ds;
}

LabeledDataset subsample_longtail(const LabeledDataset& source,
                                  const ClassProfile& profile,
                                  std::uint64_t seed) {
  if (profile.class_count() != source.class_count)
    throw ConfigError("subsample: profile/source class count mismatch");
  auto by_class = source.indices_by_class();
  Rng rng(mix_seed(seed, kSubsampleSalt));
  LabeledDataset out;
  out.dim = source.dim;
  out.class_count = source.class_count;
  out.seed = seed;
  for (std::size_t c = 0; c < profile.class_count(); ++c) {
    auto& pool = by_class[c];
    std::size_t want = profile.counts[c];
    if (pool.size() < want)
      throw ConfigError("subsample: class " + std::to_string(c) +
                        " has too few source samples");
    // Partial Fisher-Yates: the first `want` slots become a uniform
    // without-replacement draw.
    for (std::size_t k = 0; k < want; ++k) {
      std::size_t j = k + rng.uniform_int(pool.size() - k);
      std::swap(pool[k], pool[j]);
      std::size_t idx = pool[k];
      const float* row = source.input(idx);
      out.inputs.insert(out.inputs.end(), row, row + source.dim);
      out.labels.push_back(source.labels[idx]);
    }
  }
  return out;
}

std::vector<double> branch_probabilities(const ClassProfile& profile,
                                         BranchKind kind) {
  std::size_t c = profile.class_count();
  if (c == 0) throw ConfigError("branch_probabilities: empty profile");
  std::vector<double> p(c);
  if (kind == BranchKind::balanced) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(c));
  } else {
    double total = static_cast<double>(profile.total());
    for (std::size_t i = 0; i < c; ++i)
      p[i] = static_cast<double>(profile.counts[i]) / total;
  }
  return p;
}

IndexSampler::IndexSampler(const LabeledDataset& dataset, BranchKind kind,
                           std::uint64_t seed)
    : dataset_(&dataset), kind_(kind), rng_(seed) {
  if (dataset.size() == 0) throw ConfigError("sampler: empty dataset");
  if (kind == BranchKind::balanced) {
    by_class_ = dataset.indices_by_class();
    for (std::size_t c = 0; c < by_class_.size(); ++c)
      if (by_class_[c].empty())
        throw ConfigError("sampler: class " + std::to_string(c) +
                          " has no samples");
  }
}

std::size_t IndexSampler::next() {
  if (kind_ == BranchKind::balanced) {
    std::size_t c = rng_.uniform_int(by_class_.size());
    std::size_t k = rng_.uniform_int(by_class_[c].size());
    return by_class_[c][k];
  }
  return rng_.uniform_int(dataset_->size());
}

std::vector<std::size_t> IndexSampler::next_batch(std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("sampler: batch_size must be positive");
  std::vector<std::size_t> out(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) out[i] = next();
  return out;
}

void save_dataset(const LabeledDataset& dataset,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ClassProfile prof = dataset.profile();

  {
    std::ofstream m(dir / "manifest.txt", std::ios::binary);
    if (!m) throw std::runtime_error("cannot write manifest in " + dir.string());
    m << "class_count=" << dataset.class_count << '\n';
    m << "counts=";
    for (std::size_t i = 0; i < prof.counts.size(); ++i) {
      if (i) m << ',';
      m << prof.counts[i];
    }
    m << '\n';
    m << "dim=" << dataset.dim << '\n';
    m << "seed=" << dataset.seed << '\n';
  }

  {
    std::ofstream f(dir / "inputs.f32", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write inputs in " + dir.string());
    // Host is little-endian on every supported target; static_assert the
    // float width and write raw.
    static_assert(sizeof(float) == 4);
    write_exact(f, dataset.inputs.data(), dataset.inputs.size() * 4);
    if (!f) throw std::runtime_error("write failed: inputs.f32");
  }
  {
    std::ofstream f(dir / "labels.i32", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write labels in " + dir.string());
    static_assert(sizeof(std::int32_t) == 4);
    write_exact(f, dataset.labels.data(), dataset.labels.size() * 4);
    if (!f) throw std::runtime_error("write failed: labels.i32");
  }
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream m(dir / "manifest.txt", std::ios::binary);
  if (!m) throw std::runtime_error("cannot read manifest in " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(m, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("manifest: bad line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"class_count", "counts", "dim", "seed"})
    if (!kv.count(key))
      throw ConfigError(std::string("manifest: missing key ") + key);

  LabeledDataset ds;
  ds.class_count = std::stoull(kv["class_count"]);
  ds.dim = std::stoull(kv["dim"]);
  ds.seed = std::stoull(kv["seed"]);

  std::vector<std::size_t> counts;
  {
    std::istringstream cs(kv["counts"]);
    std::string tok;
    while (std::getline(cs, tok, ','))
      counts.push_back(std::stoull(tok));
  }
  if (counts.size() != ds.class_count)
    throw ConfigError("manifest: counts length != class_count");
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;

  {
    std::ifstream f(dir / "inputs.f32", std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("cannot read inputs in " + dir.string());
    auto bytes = static_cast<std::size_t>(f.tellg());
    if (bytes != total * ds.dim * 4)
      throw ConfigError("inputs.f32: size does not match manifest");
    ds.inputs.resize(total * ds.dim);
    f.seekg(0);
    f.read(reinterpret_cast<char*>(ds.inputs.data()),
           static_cast<std::streamsize>(bytes));
    if (!f) throw std::runtime_error("read failed: inputs.f32");
  }
  {
    std::ifstream f(dir / "labels.i32", std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("cannot read labels in " + dir.string());
    auto bytes = static_cast<std::size_t>(f.tellg());
    if (bytes != total * 4)
      throw ConfigError("labels.i32: size does not match manifest");
    ds.labels.resize(total);
    f.seekg(0);
    f.read(reinterpret_cast<char*>(ds.labels.data()),
           static_cast<std::streamsize>(bytes));
    if (!f) throw std::runtime_error("read failed: labels.i32");
  }

  ClassProfile actual = ds.profile();
  if (actual.counts != counts)
    throw ConfigError("dataset: label counts disagree with manifest");
  return ds;
}

}  // namespace pih2t

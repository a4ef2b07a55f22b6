#include "pih2t/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "pih2t/common.hpp"

namespace pih2t {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'I', 'H', '2', 'T', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
template <typename T>
void put(std::ofstream& out, T v) {
  put_bytes(out, &v, sizeof(T));
}
void put_string(std::ofstream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}
void put_block(std::ofstream& out, const std::string& name,
               const std::vector<std::uint64_t>& dims,
               const double* values) {
  put_string(out, name);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  std::uint64_t total = 1;
  for (std::uint64_t d : dims) {
    put<std::uint64_t>(out, d);
    total *= d;
  }
  put_bytes(out, values, total * sizeof(double));
}

void get_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
}
template <typename T>
T get(std::ifstream& in) {
  T v{};
  get_bytes(in, &v, sizeof(T));
  return v;
}
std::string get_string(std::ifstream& in) {
  auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  get_bytes(in, s.data(), n);
  return s;
}

struct RawBlock {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

RawBlock get_block(std::ifstream& in) {
  RawBlock b;
  b.name = get_string(in);
  auto ndim = get<std::uint32_t>(in);
  std::uint64_t total = 1;
  b.dims.resize(ndim);
  for (std::uint32_t i = 0; i < ndim; ++i) {
    b.dims[i] = get<std::uint64_t>(in);
    total *= b.dims[i];
  }
  b.values.resize(total);
  get_bytes(in, b.values.data(), total * sizeof(double));
  return b;
}

}  // namespace

void save_checkpoint(const Model& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());

    put_bytes(out, kMagic, 8);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, meta.config_hash);
    put<std::uint64_t>(out, meta.seed);
    put<std::uint32_t>(out, meta.stage);
    put<std::uint32_t>(out, meta.epoch);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.mode));
    put<std::uint32_t>(out, model.use_pif ? 1u : 0u);
    put_string(out, model.backbone.spec().serialize());
    put_string(out, meta.rng_state);

    const ParamSet& p = model.backbone.params();
    std::uint32_t blocks = static_cast<std::uint32_t>(p.w.size() + p.b.size()) +
                           1u + (model.use_pif ? 1u : 0u);
    put<std::uint32_t>(out, blocks);

    for (std::size_t l = 0; l < p.w.size(); ++l) {
      put_block(out, "backbone.w" + std::to_string(l),
                {p.w[l].rows, p.w[l].cols}, p.w[l].data.data());
      put_block(out, "backbone.b" + std::to_string(l), {p.b[l].size()},
                p.b[l].data());
    }
    if (model.use_pif) {
      std::vector<double> ab = model.pif.a;
      ab.insert(ab.end(), model.pif.b.begin(), model.pif.b.end());
      put_block(out, "pif.ab", {2, model.pif.dim()}, ab.data());
    }
    put_block(out, "classifier.w",
              {model.classifier.rows, model.classifier.cols},
              model.classifier.data.data());
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());

  char magic[8];
  get_bytes(in, magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError(path.string() + ": not a checkpoint file");
  auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw ConfigError(path.string() + ": unsupported checkpoint version " +
                      std::to_string(version));

  LoadedCheckpoint ck;
  ck.meta.config_hash = get<std::uint64_t>(in);
  ck.meta.seed = get<std::uint64_t>(in);
  ck.meta.stage = get<std::uint32_t>(in);
  ck.meta.epoch = get<std::uint32_t>(in);
  auto mode_raw = get<std::uint32_t>(in);
  if (mode_raw > 2) throw ConfigError("checkpoint: bad mode tag");
  ck.meta.mode = static_cast<Mode>(mode_raw);
  bool use_pif = get<std::uint32_t>(in) != 0;
  std::string spec_text = get_string(in);
  ck.meta.rng_state = get_string(in);

  BackboneSpec spec = BackboneSpec::parse(spec_text);
  Rng scratch(0);  // shapes only; every parameter is overwritten below
  ck.model.backbone = Backbone(spec, scratch);
  ck.model.use_pif = use_pif;
  ck.model.pif = init_pif_params(spec.out_channels());

  auto block_count = get<std::uint32_t>(in);
  bool saw_classifier = false;
  for (std::uint32_t i = 0; i < block_count; ++i) {
    RawBlock b = get_block(in);
    ParamSet& p = ck.model.backbone.params();
    if (b.name.rfind("backbone.w", 0) == 0) {
      std::size_t l = std::stoull(b.name.substr(10));
      if (l >= p.w.size() || b.dims.size() != 2 ||
          b.dims[0] != p.w[l].rows || b.dims[1] != p.w[l].cols)
        throw ConfigError("checkpoint: block " + b.name +
                          " does not match backbone spec");
      p.w[l].data = std::move(b.values);
    } else if (b.name.rfind("backbone.b", 0) == 0) {
      std::size_t l = std::stoull(b.name.substr(10));
      if (l >= p.b.size() || b.dims.size() != 1 || b.dims[0] != p.b[l].size())
        throw ConfigError("checkpoint: block " + b.name +
                          " does not match backbone spec");
      p.b[l] = std::move(b.values);
    } else if (b.name == "pif.ab") {
      if (b.dims.size() != 2 || b.dims[0] != 2 ||
          b.dims[1] != spec.out_channels())
        throw ConfigError("checkpoint: pif.ab block has wrong shape");
      std::size_t d = spec.out_channels();
      ck.model.pif.a.assign(b.values.begin(), b.values.begin() + d);
      ck.model.pif.b.assign(b.values.begin() + d, b.values.end());
    } else if (b.name == "classifier.w") {
      if (b.dims.size() != 2 || b.dims[1] != spec.out_channels())
        throw ConfigError("checkpoint: classifier.w block has wrong shape");
      ck.model.classifier = Matrix(b.dims[0], b.dims[1]);
      ck.model.classifier.data = std::move(b.values);
      saw_classifier = true;
    } else {
      throw ConfigError("checkpoint: unknown block '" + b.name + "'");
    }
  }
  if (!saw_classifier)
    throw ConfigError("checkpoint: missing classifier.w block");
  return ck;
}

}  // namespace pih2t

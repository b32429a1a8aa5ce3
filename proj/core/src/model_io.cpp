#include "dab/model_io.hpp"

#include <cstring>
#include <fstream>

#include "dab/errors.hpp"
#include "dab/wire.hpp"

#include "json.hpp"

namespace dab {

namespace {

// Caps on sizes read back from a file, to fail fast on garbage instead of
// attempting a huge allocation.
constexpr std::uint64_t kMaxDim = 1u << 24;
constexpr std::uint64_t kMaxParams = 1u << 16;

void put_config(ByteWriter& w, const DabConfig& c) {
  w.u8(c.task == Task::Regression ? 0 : 1);
  w.u8(c.mode == TrainMode::Dab ? 0 : 1);
  w.u8(c.activation == Activation::Elu ? 0 : 1);
  w.u8(c.margin_enabled ? 1 : 0);
  w.u64(c.input_dim);
  w.u64(c.latent_dim);
  w.u64(c.num_classes);
  w.u64(c.k);
  w.u64(c.epochs);
  w.u64(c.batch_size);
  w.u64(c.seed);
  w.u64(c.encoder_hidden.size());
  for (std::size_t h : c.encoder_hidden) w.u64(h);
  w.f64(c.beta);
  w.f64(c.alpha);
  w.f64(c.gamma);
  w.f64(c.lr_theta);
  w.f64(c.lr_phi);
  w.f64(c.init_gain);
  w.f64(c.u_lb);
}

DabConfig get_config(ByteReader& r) {
  DabConfig c;
  const std::uint8_t task = r.u8();
  const std::uint8_t mode = r.u8();
  const std::uint8_t act = r.u8();
  const std::uint8_t margin = r.u8();
  if (task > 1 || mode > 1 || act > 1 || margin > 1)
    throw IoError("model file config flags out of range");
  c.task = task ? Task::Classification : Task::Regression;
  c.mode = mode ? TrainMode::Vib : TrainMode::Dab;
  c.activation = act ? Activation::Relu : Activation::Elu;
  c.margin_enabled = margin != 0;
  c.input_dim = r.u64();
  c.latent_dim = r.u64();
  c.num_classes = r.u64();
  c.k = r.u64();
  c.epochs = r.u64();
  c.batch_size = r.u64();
  c.seed = r.u64();
  const std::uint64_t nh = r.u64();
  if (c.input_dim > kMaxDim || c.latent_dim > kMaxDim || c.num_classes > kMaxDim ||
      c.k > kMaxDim || nh > 64)
    throw IoError("model file declares unreasonable dimensions");
  c.encoder_hidden.clear();
  for (std::uint64_t i = 0; i < nh; ++i) {
    const std::uint64_t h = r.u64();
    if (h == 0 || h > kMaxDim) throw IoError("model file declares unreasonable layer width");
    c.encoder_hidden.push_back(h);
  }
  c.beta = r.f64();
  c.alpha = r.f64();
  c.gamma = r.f64();
  c.lr_theta = r.f64();
  c.lr_phi = r.f64();
  c.init_gain = r.f64();
  c.u_lb = r.f64();
  return c;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const DabModel& model) {
  ByteWriter w;
  w.bytes(kModelMagic, 4);
  w.u32(kModelVersion);
  put_config(w, model.config());

  if (model.norm_mean.size() != model.norm_std.size())
    throw Error("normalization stats have mismatched sizes");
  w.u8(model.norm_mean.empty() ? 0 : 1);
  if (!model.norm_mean.empty()) {
    w.f64s(model.norm_mean);
    w.f64s(model.norm_std);
  }

  const Graph& g = model.graph();
  w.u64(g.param_names().size());
  for (const std::string& name : g.param_names()) {
    const Tensor& t = g.param(name);
    w.str(name);
    w.u64(t.shape.size());
    for (std::size_t d : t.shape) w.u64(d);
    w.f64s(t.data);
  }

  w.u64(0);  // placeholder for codebook block length, patched below
  const std::size_t mark = w.data().size();
  std::vector<std::uint8_t> cb = serialize(model.codebook());
  w.bytes(cb.data(), cb.size());
  std::vector<std::uint8_t> out = w.take();
  const std::uint64_t len = out.size() - mark;
  for (int i = 0; i < 8; ++i)
    out[mark - 8 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  return out;
}

DabModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  if (bytes.size() < 8) throw IoError("not a model file: too short");
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    throw IoError("not a model file: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kModelVersion)
    throw IoError("unsupported model format version " + std::to_string(version));

  DabConfig cfg = get_config(r);
  DabModel model(cfg);  // validates the config and rebuilds the graph shape

  if (r.u8()) {
    model.norm_mean = r.f64s(kMaxDim);
    model.norm_std = r.f64s(kMaxDim);
    if (model.norm_mean.size() != cfg.input_dim || model.norm_std.size() != cfg.input_dim)
      throw IoError("normalization stats do not match input_dim");
    for (double s : model.norm_std)
      if (!(s > 0.0)) throw IoError("normalization stddev must be positive");
  }

  Graph& g = model.graph();
  const std::uint64_t n_params = r.u64();
  if (n_params != g.param_names().size() || n_params > kMaxParams)
    throw IoError("model file holds " + std::to_string(n_params) +
                  " parameters, architecture needs " +
                  std::to_string(g.param_names().size()));
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const std::string name = r.str();
    if (!g.has_param(name)) throw IoError("unknown parameter '" + name + "' in model file");
    Tensor& t = g.param(name);
    const std::uint64_t rank = r.u64();
    if (rank != t.shape.size())
      throw IoError("parameter '" + name + "' has wrong rank in model file");
    for (std::size_t d = 0; d < rank; ++d) {
      if (r.u64() != t.shape[d])
        throw IoError("parameter '" + name + "' has wrong shape in model file");
    }
    std::vector<double> data = r.f64s();
    if (data.size() != t.data.size())
      throw IoError("parameter '" + name + "' has wrong element count in model file");
    t.data = std::move(data);
    if (!t.all_finite()) throw IoError("parameter '" + name + "' holds non-finite values");
  }

  const std::uint64_t cb_len = r.u64();
  if (cb_len != r.remaining())
    throw IoError("codebook block length disagrees with file size");
  std::vector<std::uint8_t> cb_bytes(bytes.end() - cb_len, bytes.end());
  Codebook cb = deserialize_codebook(cb_bytes);
  if (cb.k() != cfg.k || cb.dim() != cfg.latent_dim)
    throw IoError("codebook dimensions do not match the config");
  if (cb.alpha != cfg.alpha || cb.gamma != cfg.gamma)
    throw IoError("codebook alpha/gamma do not match the config");
  for (std::size_t j = 0; j < cfg.k; ++j) {
    const Tensor& mu = g.param("cb.mu" + std::to_string(j));
    if (mu.data != cb.centroids[j].mean)
      throw IoError("codebook means disagree with graph parameters");
  }
  model.codebook() = std::move(cb);
  return model;
}

std::string model_config_json(const DabModel& model) {
  const DabConfig& c = model.config();
  nlohmann::json j;
  j["task"] = c.task == Task::Regression ? "regression" : "classification";
  j["mode"] = c.mode == TrainMode::Dab ? "dab" : "vib";
  j["input_dim"] = c.input_dim;
  j["latent_dim"] = c.latent_dim;
  if (c.task == Task::Classification) j["num_classes"] = c.num_classes;
  j["encoder_hidden"] = c.encoder_hidden;
  j["activation"] = c.activation == Activation::Elu ? "elu" : "relu";
  j["k"] = c.k;
  j["beta"] = c.beta;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["lr_theta"] = c.lr_theta;
  j["lr_phi"] = c.lr_phi;
  j["init_gain"] = c.init_gain;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["margin_enabled"] = c.margin_enabled;
  if (c.margin_enabled) j["u_lb"] = c.u_lb;
  j["normalized_inputs"] = !model.norm_mean.empty();
  return j.dump(2) + "\n";
}

void save_model(const DabModel& model, const std::string& path) {
  std::vector<std::uint8_t> bytes = serialize_model(model);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
  }
  const std::string side = path + ".json";
  std::ofstream js(side, std::ios::binary);
  if (!js) throw IoError("cannot open '" + side + "' for writing");
  js << model_config_json(model);
  if (!js) throw IoError("write to '" + side + "' failed");
}

DabModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return deserialize_model(bytes);
}

}  // namespace dab

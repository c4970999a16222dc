#include "clusternet/serialize.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "clusternet/io_error.hpp"

namespace clusternet {

namespace {

using nlohmann::json;

constexpr char kModelMagic[8] = {'C', 'N', 'E', 'T', 'M', 'O', 'D', 'L'};
constexpr char kCheckpointMagic[8] = {'C', 'N', 'E', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

const char* embedding_name(EmbeddingKind e) {
  return e == EmbeddingKind::Identity2D ? "identity2d" : "custom";
}

EmbeddingKind parse_embedding(const std::string& name) {
  if (name == "identity2d") return EmbeddingKind::Identity2D;
  if (name == "custom") return EmbeddingKind::Custom;
  throw IoError("unknown embedding kind: " + name);
}

json config_to_json(const ModelConfig& c) {
  return json{{"k_max", c.k_max},
              {"layers", c.layers},
              {"fc_units", c.fc_units},
              {"count_units", c.count_units},
              {"leaky_slope", c.leaky_slope},
              {"embedding", embedding_name(c.embedding)},
              {"embedding_dim", c.embedding_dim},
              {"param_seed", c.param_seed},
              {"metric_mode", metric_mode_name(c.metric_mode)},
              {"metric_concat", c.metric_concat},
              {"metric_set_size", c.metric_set_size}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.k_max = j.at("k_max").get<int>();
  c.layers = j.at("layers").get<int>();
  c.fc_units = j.at("fc_units").get<int>();
  c.count_units = j.at("count_units").get<int>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.embedding = parse_embedding(j.at("embedding").get<std::string>());
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.param_seed = j.at("param_seed").get<std::uint64_t>();
  c.metric_mode = parse_metric_mode(j.at("metric_mode").get<std::string>());
  c.metric_concat = j.at("metric_concat").get<bool>();
  c.metric_set_size = j.at("metric_set_size").get<int>();
  return c;
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated container");
  return value;
}

void write_header(std::ostream& out, const char (&magic)[8],
                  const json& manifest) {
  out.write(magic, 8);
  write_pod(out, kFormatVersion);
  const std::string text = manifest.dump();
  write_pod(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json read_header(std::istream& in, const char (&magic)[8],
                 const char* what) {
  char got[8];
  in.read(got, 8);
  if (!in || std::memcmp(got, magic, 8) != 0)
    throw IoError(std::string("not a ") + what + " container");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kFormatVersion)
    throw IoError("unsupported container version " +
                             std::to_string(version));
  const auto length = read_pod<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw IoError("truncated container");
  json manifest = json::parse(text, nullptr, false);
  if (manifest.is_discarded())
    throw IoError("corrupt container manifest");
  return manifest;
}

json tensor_directory(const ModelParameters& params) {
  json dir = json::array();
  for (const ConstTensorView& v : params.tensors())
    dir.push_back(json{{"name", v.name}, {"rows", v.rows}, {"cols", v.cols}});
  return dir;
}

void write_tensor(std::ostream& out, const double* data, Eigen::Index size) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(size) *
                static_cast<std::streamsize>(sizeof(double)));
}

void read_tensor(std::istream& in, double* data, Eigen::Index size) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(size) *
              static_cast<std::streamsize>(sizeof(double)));
  if (!in) throw IoError("truncated container");
}

// Rebuilds the parameter struct from the manifest config and checks the
// stored directory against the one the config implies, entry by entry.
ModelParameters shell_from_manifest(const json& manifest) {
  ModelParameters params = ModelParameters::zeros(
      config_from_json(manifest.at("config")));
  const json& dir = manifest.at("tensors");
  const auto views = params.tensors();
  if (dir.size() != views.size())
    throw IoError("tensor directory mismatch");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const json& entry = dir[i];
    if (entry.at("name").get<std::string>() != views[i].name ||
        entry.at("rows").get<Eigen::Index>() != views[i].rows ||
        entry.at("cols").get<Eigen::Index>() != views[i].cols)
      throw IoError("tensor directory mismatch at " +
                               views[i].name);
  }
  return params;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void save_model(const ModelParameters& params, std::ostream& out,
                const std::string& train_digest) {
  json manifest{{"format", "clusternet-model"},
                {"version", kFormatVersion},
                {"config", config_to_json(params.config)},
                {"train_digest", train_digest},
                {"tensors", tensor_directory(params)}};
  write_header(out, kModelMagic, manifest);
  for (const ConstTensorView& v : params.tensors())
    write_tensor(out, v.data, v.size());
  if (!out) throw IoError("model write failed");
}

void save_model_file(const ModelParameters& params, const std::string& path,
                     const std::string& train_digest) {
  auto out = open_output(path);
  save_model(params, out, train_digest);
}

ModelParameters load_model(std::istream& in) {
  const json manifest = read_header(in, kModelMagic, "model");
  ModelParameters params = shell_from_manifest(manifest);
  for (TensorView& v : params.tensors()) read_tensor(in, v.data, v.size());
  return params;
}

ModelParameters load_model_file(const std::string& path) {
  auto in = open_input(path);
  return load_model(in);
}

std::string read_model_digest(const std::string& path) {
  auto in = open_input(path);
  const json manifest = read_header(in, kModelMagic, "model");
  return manifest.value("train_digest", std::string());
}

void save_checkpoint(const ModelParameters& params, const AdadeltaState& state,
                     int step, std::ostream& out) {
  const auto views = params.tensors();
  if (state.grad_sq.size() != views.size() ||
      state.delta_sq.size() != views.size())
    throw std::invalid_argument("optimizer state does not match the model");
  json manifest{{"format", "clusternet-checkpoint"},
                {"version", kFormatVersion},
                {"step", step},
                {"config", config_to_json(params.config)},
                {"tensors", tensor_directory(params)}};
  write_header(out, kCheckpointMagic, manifest);
  for (const ConstTensorView& v : views) write_tensor(out, v.data, v.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    write_tensor(out, state.grad_sq[i].data(), state.grad_sq[i].size());
    write_tensor(out, state.delta_sq[i].data(), state.delta_sq[i].size());
  }
  if (!out) throw IoError("checkpoint write failed");
}

void save_checkpoint_file(const ModelParameters& params,
                          const AdadeltaState& state, int step,
                          const std::string& path) {
  auto out = open_output(path);
  save_checkpoint(params, state, step, out);
}

Checkpoint load_checkpoint(std::istream& in) {
  const json manifest = read_header(in, kCheckpointMagic, "checkpoint");
  Checkpoint ckpt{shell_from_manifest(manifest), {},
                  manifest.at("step").get<int>()};
  auto views = ckpt.params.tensors();
  for (TensorView& v : views) read_tensor(in, v.data, v.size());
  ckpt.state = AdadeltaState::create(ckpt.params);
  for (std::size_t i = 0; i < views.size(); ++i) {
    read_tensor(in, ckpt.state.grad_sq[i].data(), ckpt.state.grad_sq[i].size());
    read_tensor(in, ckpt.state.delta_sq[i].data(),
                ckpt.state.delta_sq[i].size());
  }
  return ckpt;
}

Checkpoint load_checkpoint_file(const std::string& path) {
  auto in = open_input(path);
  return load_checkpoint(in);
}

}  // namespace clusternet

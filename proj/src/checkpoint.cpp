#include "hyfi/checkpoint.hpp"

#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace hyfi {

namespace {

[[noreturn]] void checkpoint_error(const std::string& msg) {
  throw std::runtime_error("checkpoint error: " + msg);
}

}  // namespace

void save_checkpoint(const ModelParameters& params, const std::filesystem::path& file) {
  nlohmann::json manifest;
  manifest["format"] = "hyfi-checkpoint";
  manifest["version"] = 1;
  manifest["activation"] = to_string(params.encoder.activation);
  manifest["layers"] = params.encoder.layers.size();
  auto tensors = nlohmann::json::array();
  for (const auto& [name, tensor] : parameter_tensors(params)) {
    tensors.push_back({{"name", name}, {"rows", tensor->rows()}, {"cols", tensor->cols()}});
  }
  manifest["tensors"] = tensors;

  std::ofstream out(file, std::ios::binary);
  if (!out) checkpoint_error("cannot write " + file.string());
  out << manifest.dump() << '\n';
  for (const auto& [name, tensor] : parameter_tensors(params)) {
    // row-major storage, written as-is
    out.write(reinterpret_cast<const char*>(tensor->data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(tensor->size())));
  }
  if (!out) checkpoint_error("write failed for " + file.string());
}

ModelParameters load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) checkpoint_error("missing file: " + file.string());

  std::string header;
  if (!std::getline(in, header)) checkpoint_error("empty checkpoint " + file.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    checkpoint_error("malformed manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "hyfi-checkpoint")
    checkpoint_error("not a hyfi checkpoint: " + file.string());

  const Activation activation = activation_from_string(manifest.at("activation").get<std::string>());
  const std::size_t num_layers = manifest.at("layers").get<std::size_t>();

  ModelParameters params;
  params.encoder.activation = activation;
  params.encoder.layers.resize(num_layers);

  std::map<std::string, Matrix*> slots;
  for (auto& [name, tensor] : parameter_tensors(params)) slots[name] = tensor;
  // Heads always exist even if the walk above skipped slopes (non-prelu).
  for (auto& layer : params.encoder.layers) {
    layer.edge_slope = Matrix::Constant(1, 1, 0.25);
    layer.node_slope = Matrix::Constant(1, 1, 0.25);
  }

  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const Index rows = entry.at("rows").get<Index>();
    const Index cols = entry.at("cols").get<Index>();
    auto it = slots.find(name);
    if (it == slots.end()) checkpoint_error("unknown tensor '" + name + "'");
    it->second->resize(rows, cols);
    in.read(reinterpret_cast<char*>(it->second->data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rows * cols)));
    if (!in) checkpoint_error("truncated tensor '" + name + "'");
    if (!it->second->allFinite()) checkpoint_error("non-finite values in tensor '" + name + "'");
  }

  for (const auto& [name, tensor] : parameter_tensors(params)) {
    if (tensor->size() == 0) checkpoint_error("tensor '" + name + "' missing from checkpoint");
  }
  return params;
}

}  // namespace hyfi

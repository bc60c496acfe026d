#include "hyfi/config.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <vector>

#include "hyfi/rng.hpp"

namespace hyfi {

nlohmann::json config_to_json(const TrainConfig& cfg) {
  return nlohmann::json{
      {"epochs", cfg.epochs},
      {"learning_rate", cfg.learning_rate},
      {"weight_decay", cfg.weight_decay},
      {"adam_beta1", cfg.adam_beta1},
      {"adam_beta2", cfg.adam_beta2},
      {"adam_eps", cfg.adam_eps},
      {"tau_node", cfg.loss.tau_node},
      {"tau_edge", cfg.loss.tau_edge},
      {"alpha", cfg.loss.alpha},
      {"use_weak_positive", cfg.loss.use_weak_positive},
      {"use_positive", cfg.loss.use_positive},
      {"use_weak_weight", cfg.loss.use_weak_weight},
      {"use_edge_loss", cfg.loss.use_edge_loss},
      {"augmentation", to_string(cfg.augmentation.kind)},
      {"sigma", cfg.augmentation.sigma},
      {"flip_prob", cfg.augmentation.flip_prob},
      {"drop_rate", cfg.augmentation.drop_rate},
      {"views", cfg.augmentation.num_views},
      {"hidden_dim", cfg.hidden_dim},
      {"proj_dim", cfg.proj_dim},
      {"layers", cfg.num_layers},
      {"activation", to_string(cfg.activation)},
      {"seed", cfg.master_seed},
      {"checkpoint_every", cfg.checkpoint_every},
  };
}

nlohmann::json split_spec_to_json(const SplitSpec& spec) {
  return nlohmann::json{
      {"train_frac", spec.train_frac}, {"valid_frac", spec.valid_frac},
      {"test_frac", spec.test_frac},   {"splits", spec.num_splits},
      {"inits", spec.num_inits},       {"eval_seed", spec.seed},
  };
}

namespace {

template <typename T>
void take(const nlohmann::json& patch, const char* key, T& out, std::vector<std::string>& used) {
  if (patch.contains(key)) {
    out = patch.at(key).get<T>();
    used.push_back(key);
  }
}

void check_unknown(const nlohmann::json& patch, const std::vector<std::string>& used,
                   const char* what) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (std::find(used.begin(), used.end(), it.key()) == used.end())
      throw std::invalid_argument(std::string("config error: unknown ") + what + " key '" +
                                  it.key() + "'");
  }
}

}  // namespace

void apply_config_json(TrainConfig& cfg, const nlohmann::json& patch) {
  std::vector<std::string> used;
  take(patch, "epochs", cfg.epochs, used);
  take(patch, "learning_rate", cfg.learning_rate, used);
  take(patch, "weight_decay", cfg.weight_decay, used);
  take(patch, "adam_beta1", cfg.adam_beta1, used);
  take(patch, "adam_beta2", cfg.adam_beta2, used);
  take(patch, "adam_eps", cfg.adam_eps, used);
  take(patch, "tau_node", cfg.loss.tau_node, used);
  take(patch, "tau_edge", cfg.loss.tau_edge, used);
  take(patch, "alpha", cfg.loss.alpha, used);
  take(patch, "use_weak_positive", cfg.loss.use_weak_positive, used);
  take(patch, "use_positive", cfg.loss.use_positive, used);
  take(patch, "use_weak_weight", cfg.loss.use_weak_weight, used);
  take(patch, "use_edge_loss", cfg.loss.use_edge_loss, used);
  if (patch.contains("augmentation")) {
    cfg.augmentation.kind = augmentation_kind_from_string(patch.at("augmentation").get<std::string>());
    used.push_back("augmentation");
  }
  take(patch, "sigma", cfg.augmentation.sigma, used);
  take(patch, "flip_prob", cfg.augmentation.flip_prob, used);
  take(patch, "drop_rate", cfg.augmentation.drop_rate, used);
  take(patch, "views", cfg.augmentation.num_views, used);
  take(patch, "hidden_dim", cfg.hidden_dim, used);
  take(patch, "proj_dim", cfg.proj_dim, used);
  take(patch, "layers", cfg.num_layers, used);
  if (patch.contains("activation")) {
    cfg.activation = activation_from_string(patch.at("activation").get<std::string>());
    used.push_back("activation");
  }
  take(patch, "seed", cfg.master_seed, used);
  take(patch, "checkpoint_every", cfg.checkpoint_every, used);
  check_unknown(patch, used, "config");
}

void apply_split_json(SplitSpec& spec, const nlohmann::json& patch) {
  std::vector<std::string> used;
  take(patch, "train_frac", spec.train_frac, used);
  take(patch, "valid_frac", spec.valid_frac, used);
  take(patch, "test_frac", spec.test_frac, used);
  take(patch, "splits", spec.num_splits, used);
  take(patch, "inits", spec.num_inits, used);
  take(patch, "eval_seed", spec.seed, used);
  check_unknown(patch, used, "split");
}

nlohmann::json load_config_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("config error: missing file: " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config error: " + file.string() + ": " + e.what());
  }
}

std::string config_fingerprint(const nlohmann::json& resolved) {
  const std::string dump = resolved.dump();
  std::uint64_t h = rng::hash_label(dump);
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

nlohmann::json make_run_manifest(const nlohmann::json& resolved_config,
                                 const std::filesystem::path& data_dir,
                                 std::uint64_t master_seed) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));

  std::ostringstream fp;
  fp << std::hex << dataset_fingerprint(data_dir);

  return nlohmann::json{
      {"config", resolved_config},
      {"config_fingerprint", config_fingerprint(resolved_config)},
      {"dataset", data_dir.string()},
      {"dataset_fingerprint", fp.str()},
      {"code_version", kCodeVersion},
      {"master_seed", master_seed},
      {"started_at", stamp},
  };
}

void write_json(const nlohmann::json& j, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

}  // namespace hyfi

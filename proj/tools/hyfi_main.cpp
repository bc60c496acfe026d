// hyfi: self-supervised hypergraph embeddings with weak-positive group
// contrast. Subcommands: train, evaluate, analyze, ablate, embed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "hyfi/checkpoint.hpp"
#include "hyfi/config.hpp"
#include "hyfi/evaluation.hpp"
#include "hyfi/rng.hpp"
#include "hyfi/training.hpp"

using namespace hyfi;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string data;
  std::string out;
  std::string config_file;

  std::uint64_t seed = 0;
  int epochs = 0;
  double lr = 0, weight_decay = 0, tau_node = 0, tau_edge = 0, alpha = 0;
  double sigma = 0, flip_prob = 0, drop_rate = 0;
  int views = 0, layers = 0, checkpoint_every = 0;
  Index hidden_dim = 0, proj_dim = 0;
  std::string augmentation, activation;
  bool no_weak_positive = false, no_positive = false, no_weak_weight = false,
       no_edge_loss = false;

  int splits = 20, inits = 5;
  std::string embedding = "encoder";
};

void add_train_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_file, "JSON config file; flags override it");
  cmd->add_option("--seed", a.seed, "master seed for every random stream");
  cmd->add_option("--epochs", a.epochs);
  cmd->add_option("--lr", a.lr, "learning rate");
  cmd->add_option("--weight-decay", a.weight_decay);
  cmd->add_option("--hidden-dim", a.hidden_dim);
  cmd->add_option("--proj-dim", a.proj_dim);
  cmd->add_option("--layers", a.layers);
  cmd->add_option("--tau-node", a.tau_node);
  cmd->add_option("--tau-edge", a.tau_edge);
  cmd->add_option("--alpha", a.alpha, "edge-loss weight");
  cmd->add_option("--sigma", a.sigma, "noise scale for gaussian/uniform");
  cmd->add_option("--flip-prob", a.flip_prob, "bernoulli flip probability");
  cmd->add_option("--drop-rate", a.drop_rate, "drop probability for drop kinds");
  cmd->add_option("--views", a.views, "number of noise views M");
  cmd->add_option("--augmentation", a.augmentation,
                  "gaussian|uniform|bernoulli|drop-incidence|drop-node|drop-hyperedge");
  cmd->add_option("--activation", a.activation, "relu|prelu|elu|identity");
  cmd->add_option("--checkpoint-every", a.checkpoint_every);
  cmd->add_flag("--no-weak-positive", a.no_weak_positive, "drop the weak-positive term");
  cmd->add_flag("--no-positive", a.no_positive, "drop the noise-view positive term");
  cmd->add_flag("--no-weak-weight", a.no_weak_weight, "weight every sharing pair by 1");
  cmd->add_flag("--no-edge-loss", a.no_edge_loss, "disable the hyperedge-level loss");
}

void add_eval_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--splits", a.splits, "number of dataset splits");
  cmd->add_option("--inits", a.inits, "random classifier inits per split");
  cmd->add_option("--embedding", a.embedding, "probe representation: encoder|projected");
}

nlohmann::json cli_patch(const CLI::App* cmd, const CommonArgs& a) {
  nlohmann::json p;
  if (cmd->count("--seed")) p["seed"] = a.seed;
  if (cmd->count("--epochs")) p["epochs"] = a.epochs;
  if (cmd->count("--lr")) p["learning_rate"] = a.lr;
  if (cmd->count("--weight-decay")) p["weight_decay"] = a.weight_decay;
  if (cmd->count("--hidden-dim")) p["hidden_dim"] = a.hidden_dim;
  if (cmd->count("--proj-dim")) p["proj_dim"] = a.proj_dim;
  if (cmd->count("--layers")) p["layers"] = a.layers;
  if (cmd->count("--tau-node")) p["tau_node"] = a.tau_node;
  if (cmd->count("--tau-edge")) p["tau_edge"] = a.tau_edge;
  if (cmd->count("--alpha")) p["alpha"] = a.alpha;
  if (cmd->count("--sigma")) p["sigma"] = a.sigma;
  if (cmd->count("--flip-prob")) p["flip_prob"] = a.flip_prob;
  if (cmd->count("--drop-rate")) p["drop_rate"] = a.drop_rate;
  if (cmd->count("--views")) p["views"] = a.views;
  if (cmd->count("--augmentation")) p["augmentation"] = a.augmentation;
  if (cmd->count("--activation")) p["activation"] = a.activation;
  if (cmd->count("--checkpoint-every")) p["checkpoint_every"] = a.checkpoint_every;
  if (a.no_weak_positive) p["use_weak_positive"] = false;
  if (a.no_positive) p["use_positive"] = false;
  if (a.no_weak_weight) p["use_weak_weight"] = false;
  if (a.no_edge_loss) p["use_edge_loss"] = false;
  return p;
}

TrainConfig resolve_train_config(const CLI::App* cmd, const CommonArgs& a) {
  TrainConfig cfg;
  if (!a.config_file.empty()) apply_config_json(cfg, load_config_file(a.config_file));
  apply_config_json(cfg, cli_patch(cmd, a));
  cfg.validate();
  return cfg;
}

void write_loss_log(const std::vector<LossRecord>& history, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "epoch,loss_node,loss_edge,loss_total\n";
  out.precision(17);
  for (const auto& rec : history)
    out << rec.epoch << ',' << rec.node_loss << ',' << rec.edge_loss << ',' << rec.total_loss
        << '\n';
}

void write_eval_outputs(const EvalReport& report, const fs::path& dir) {
  std::ofstream csv(dir / "eval.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "eval.csv").string());
  csv << "split,init,accuracy\n";
  csv.precision(17);
  for (const auto& run : report.runs)
    csv << run.split << ',' << run.init << ',' << run.accuracy << '\n';

  nlohmann::json summary{
      {"mean_accuracy", report.mean_accuracy},
      {"std_accuracy", report.std_accuracy},
      {"runs", report.runs.size()},
      {"skipped_splits", report.skipped_splits},
      {"config_fingerprint", report.config_fingerprint},
  };
  write_json(summary, dir / "eval_summary.json");
}

Matrix probe_embeddings(const Dataset& data, const ModelParameters& params,
                        const std::string& which) {
  if (which == "encoder") {
    return encoder_forward(data.graph, data.features, params.encoder).first;
  }
  if (which == "projected") {
    return encode_view(data.graph, data.features, params).node_proj;
  }
  throw std::invalid_argument("config error: unknown embedding choice '" + which + "'");
}

EvalReport evaluate_checkpoint(const Dataset& data, const ModelParameters& params,
                               const CommonArgs& a, const nlohmann::json& resolved) {
  SplitSpec spec;
  spec.num_splits = a.splits;
  spec.num_inits = a.inits;
  spec.seed = rng::derive(a.seed, "evaluation");
  Matrix embeddings = probe_embeddings(data, params, a.embedding);
  EvalReport report = linear_evaluate(embeddings, data.labels, spec);
  report.config_fingerprint = config_fingerprint(resolved);
  return report;
}

int cmd_train(const CLI::App* cmd, const CommonArgs& a) {
  Dataset data = load_dataset(a.data);
  TrainConfig cfg = resolve_train_config(cmd, a);
  const nlohmann::json resolved = config_to_json(cfg);

  fs::create_directories(a.out);
  write_json(make_run_manifest(resolved, a.data, cfg.master_seed), fs::path(a.out) / "manifest.json");

  EpochHook hook;
  if (cfg.checkpoint_every > 0) {
    hook = [&](int epoch, const ModelParameters& params) {
      save_checkpoint(params, fs::path(a.out) / ("checkpoint_epoch" + std::to_string(epoch) + ".bin"));
    };
  }
  TrainResult result = train(data.graph, data.features, cfg, &data.labels, hook);

  save_checkpoint(result.params, fs::path(a.out) / "checkpoint.bin");
  write_loss_log(result.history, fs::path(a.out) / "loss.csv");
  std::cout << "trained " << cfg.epochs << " epochs; final loss "
            << result.history.back().total_loss << "; outputs in " << a.out << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& a, const std::string& checkpoint) {
  Dataset data = load_dataset(a.data);
  ModelParameters params = load_checkpoint(checkpoint);
  nlohmann::json resolved{{"checkpoint", checkpoint},
                          {"embedding", a.embedding},
                          {"splits", a.splits},
                          {"inits", a.inits},
                          {"seed", a.seed}};
  EvalReport report = evaluate_checkpoint(data, params, a, resolved);

  fs::create_directories(a.out);
  write_eval_outputs(report, a.out);
  std::cout << "accuracy " << report.mean_accuracy << " +/- " << report.std_accuracy << " over "
            << report.runs.size() << " runs\n";
  return 0;
}

int cmd_analyze(const CommonArgs& a, int max_c) {
  Dataset data = load_dataset(a.data);
  CommonalityCurve curve = commonality_curve(data.graph, data.features, max_c);

  fs::create_directories(a.out);
  const fs::path file = fs::path(a.out) / "commonality.csv";
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "c,mean_cosine,pair_count\n";
  out.precision(17);
  for (const auto& point : curve.points)
    out << point.shared_count << ',' << point.mean_cosine << ',' << point.pair_count << '\n';

  std::cout << "commonality curve with " << curve.points.size() << " levels";
  if (curve.zero_norm_rows > 0)
    std::cout << " (" << curve.zero_norm_rows << " zero-norm feature rows excluded)";
  std::cout << "; written to " << file.string() << "\n";
  return 0;
}

int cmd_embed(const CommonArgs& a, const std::string& checkpoint) {
  Dataset data = load_dataset(a.data);
  ModelParameters params = load_checkpoint(checkpoint);
  Matrix embeddings = probe_embeddings(data, params, a.embedding);

  fs::create_directories(a.out);
  const fs::path file = fs::path(a.out) / "embeddings.csv";
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.precision(17);
  for (Index i = 0; i < embeddings.rows(); ++i) {
    for (Index j = 0; j < embeddings.cols(); ++j) {
      if (j > 0) out << ',';
      out << embeddings(i, j);
    }
    out << '\n';
  }
  std::cout << "wrote " << embeddings.rows() << "x" << embeddings.cols() << " embeddings to "
            << file.string() << "\n";
  return 0;
}

int cmd_ablate(const CLI::App* cmd, const CommonArgs& a, const std::string& grid) {
  Dataset data = load_dataset(a.data);
  const TrainConfig base = resolve_train_config(cmd, a);

  struct Cell {
    std::string name;
    TrainConfig cfg;
  };
  std::vector<Cell> cells;
  if (grid == "loss") {
    cells.push_back({"full", base});
    Cell c{"no_weak_positive", base};
    c.cfg.loss.use_weak_positive = false;
    cells.push_back(c);
    c = {"no_positive", base};
    c.cfg.loss.use_positive = false;
    cells.push_back(c);
    c = {"no_weak_weight", base};
    c.cfg.loss.use_weak_weight = false;
    cells.push_back(c);
    c = {"no_edge_loss", base};
    c.cfg.loss.use_edge_loss = false;
    cells.push_back(c);
  } else if (grid == "augmentation") {
    for (auto kind : {AugmentationKind::gaussian, AugmentationKind::uniform,
                      AugmentationKind::bernoulli, AugmentationKind::drop_incidence,
                      AugmentationKind::drop_node, AugmentationKind::drop_hyperedge}) {
      Cell c{to_string(kind), base};
      c.cfg.augmentation.kind = kind;
      cells.push_back(c);
    }
    for (auto& cell : cells)
      if (cell.name.rfind("drop", 0) == 0)
        std::replace(cell.name.begin(), cell.name.end(), '-', '_');
  } else {
    throw std::invalid_argument("config error: unknown grid '" + grid + "' (loss|augmentation)");
  }

  fs::create_directories(a.out);
  struct Row {
    std::string name;
    double mean, sd;
  };
  std::vector<Row> rows;
  for (const auto& cell : cells) {
    const fs::path cell_dir = fs::path(a.out) / cell.name;
    fs::create_directories(cell_dir);
    const nlohmann::json resolved = config_to_json(cell.cfg);
    write_json(make_run_manifest(resolved, a.data, cell.cfg.master_seed),
               cell_dir / "manifest.json");

    TrainResult result = train(data.graph, data.features, cell.cfg, &data.labels);
    save_checkpoint(result.params, cell_dir / "checkpoint.bin");
    write_loss_log(result.history, cell_dir / "loss.csv");

    EvalReport report = evaluate_checkpoint(data, result.params, a, resolved);
    write_eval_outputs(report, cell_dir);
    rows.push_back({cell.name, report.mean_accuracy, report.std_accuracy});
    std::cout << cell.name << ": " << report.mean_accuracy << " +/- " << report.std_accuracy
              << "\n";
  }

  std::vector<Row> ranked = rows;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Row& x, const Row& y) { return x.mean > y.mean; });
  std::ofstream out(fs::path(a.out) / "ablation.csv");
  out << "variant,mean_accuracy,std_accuracy\n";
  out.precision(17);
  for (const auto& row : ranked) out << row.name << ',' << row.mean << ',' << row.sd << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-supervised hypergraph embeddings via weak-positive group contrast"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string checkpoint, grid = "loss";
  int max_c = 0;

  auto* train_cmd = app.add_subcommand("train", "train an encoder on a dataset directory");
  train_cmd->add_option("--data", args.data, "dataset directory")->required();
  train_cmd->add_option("--out", args.out, "output directory")->required();
  add_train_options(train_cmd, args);

  auto* eval_cmd = app.add_subcommand("evaluate", "linear evaluation of a trained checkpoint");
  eval_cmd->add_option("--data", args.data)->required();
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--out", args.out)->required();
  eval_cmd->add_option("--seed", args.seed);
  add_eval_options(eval_cmd, args);

  auto* analyze_cmd = app.add_subcommand("analyze", "commonality-similarity curve of a dataset");
  analyze_cmd->add_option("--data", args.data)->required();
  analyze_cmd->add_option("--out", args.out)->required();
  analyze_cmd->add_option("--max-c", max_c, "cap the curve at this commonality (0 = no cap)");

  auto* ablate_cmd = app.add_subcommand("ablate", "run a loss-flag or augmentation grid");
  ablate_cmd->add_option("--data", args.data)->required();
  ablate_cmd->add_option("--out", args.out)->required();
  ablate_cmd->add_option("--grid", grid, "loss|augmentation");
  add_train_options(ablate_cmd, args);
  add_eval_options(ablate_cmd, args);

  auto* embed_cmd = app.add_subcommand("embed", "export node embeddings as CSV");
  embed_cmd->add_option("--data", args.data)->required();
  embed_cmd->add_option("--checkpoint", checkpoint)->required();
  embed_cmd->add_option("--out", args.out)->required();
  embed_cmd->add_option("--embedding", args.embedding, "encoder|projected");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(train_cmd, args);
    if (eval_cmd->parsed()) return cmd_evaluate(args, checkpoint);
    if (analyze_cmd->parsed()) return cmd_analyze(args, max_c);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate_cmd, args, grid);
    if (embed_cmd->parsed()) return cmd_embed(args, checkpoint);
  } catch (const std::exception& e) {
    std::cerr << "hyfi: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

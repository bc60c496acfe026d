#include "hyfi/training.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hyfi/rng.hpp"

namespace hyfi {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("config error: epochs must be >= 1");
  if (learning_rate <= 0) throw std::invalid_argument("config error: learning_rate must be positive");
  if (weight_decay < 0) throw std::invalid_argument("config error: weight_decay must be >= 0");
  if (adam_beta1 <= 0 || adam_beta1 >= 1 || adam_beta2 <= 0 || adam_beta2 >= 1)
    throw std::invalid_argument("config error: adam betas must lie in (0,1)");
  if (adam_eps <= 0) throw std::invalid_argument("config error: adam_eps must be positive");
  if (hidden_dim <= 0 || proj_dim <= 0)
    throw std::invalid_argument("config error: dimensions must be positive");
  if (num_layers < 1) throw std::invalid_argument("config error: num_layers must be >= 1");
  loss.validate();
  augmentation.validate();
}

std::vector<Index> TrainConfig::encoder_dims(Index input_dim) const {
  std::vector<Index> dims{input_dim};
  for (int k = 0; k < num_layers; ++k) dims.push_back(hidden_dim);
  return dims;
}

OptimizerState OptimizerState::make(const ModelParameters& params) {
  OptimizerState state;
  state.first_moment = zeros_like(params);
  state.second_moment = zeros_like(params);
  return state;
}

LossContext LossContext::make(const Hypergraph& h, const LossConfig& cfg) {
  LossContext ctx;
  ctx.node_weights = weak_weights(h.overlap(OverlapLevel::node));
  if (cfg.use_edge_loss) ctx.edge_weights = weak_weights(h.overlap(OverlapLevel::edge));
  return ctx;
}

namespace {

struct Encoding {
  const Hypergraph* graph;
  Matrix node_embed;  // P
  Matrix edge_embed;  // Q
  Matrix node_proj;   // Z
  Matrix edge_proj;   // Y
  EncoderTrace enc_trace;
  ProjectionTrace proj_trace;
};

Encoding run_forward(const Hypergraph& graph, const FeatureMatrix& feats,
                     const ModelParameters& params, bool with_trace) {
  Encoding enc;
  enc.graph = &graph;
  std::tie(enc.node_embed, enc.edge_embed) =
      encoder_forward(graph, feats, params.encoder, with_trace ? &enc.enc_trace : nullptr);
  std::tie(enc.node_proj, enc.edge_proj) = project(enc.node_embed, enc.edge_embed,
                                                   params.projection,
                                                   with_trace ? &enc.proj_trace : nullptr);
  return enc;
}

std::vector<std::uint8_t> degree_mask(const std::vector<int>& degrees) {
  std::vector<std::uint8_t> mask(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) mask[i] = degrees[i] > 0;
  return mask;
}

// Elements emptied by a drop view contribute no positive term for that view.
void build_masks(const std::vector<NoiseView>& views, const Hypergraph& origin,
                 ViewMasks& node_masks, ViewMasks& edge_masks) {
  node_masks.clear();
  edge_masks.clear();
  for (const auto& view : views) {
    if (view.hypergraph_override) {
      node_masks.push_back(degree_mask(view.hypergraph_override->node_degree()));
      edge_masks.push_back(degree_mask(view.hypergraph_override->hyperedge_degree()));
    } else {
      node_masks.emplace_back();
      edge_masks.emplace_back();
    }
  }
  (void)origin;
}

// dZ -> gradient of the head input rows; accumulates head parameter grads.
Matrix head_backward(const Matrix& grad_out, const Matrix& input, const Matrix& hidden_pre,
                     const Matrix& hidden, const ProjectionParameters::Head& head,
                     ProjectionParameters::Head& grad) {
  grad.w2 += hidden.transpose() * grad_out;
  grad.b2 += grad_out.colwise().sum();
  Matrix grad_hidden = grad_out * head.w2.transpose();
  Matrix grad_pre =
      grad_hidden.cwiseProduct(activation_derivative(hidden_pre, Activation::elu, 0.0));
  grad.w1 += input.transpose() * grad_pre;
  grad.b1 += grad_pre.colwise().sum();
  return grad_pre * head.w1.transpose();
}

// Reverse pass through the two-phase layers of one encoding.
void encoder_backward(const Encoding& enc, const Matrix& grad_node_out, const Matrix& grad_edge_out,
                      const EncoderParameters& params, EncoderParameters& grads) {
  const Hypergraph& graph = *enc.graph;
  const Activation act = params.activation;
  const bool prelu = act == Activation::prelu;
  const std::size_t num_layers = params.layers.size();

  Matrix grad_node = grad_node_out;
  for (std::size_t k = num_layers; k-- > 0;) {
    const auto& layer = params.layers[k];
    auto& layer_grads = grads.layers[k];
    const auto& tr = enc.enc_trace.layers[k];

    Matrix grad_node_pre =
        grad_node.cwiseProduct(activation_derivative(tr.node_pre, act, layer.node_slope(0, 0)));
    if (prelu) {
      layer_grads.node_slope(0, 0) +=
          (tr.node_pre.array() < 0.0).select(grad_node.array() * tr.node_pre.array(), 0.0).sum();
    }
    layer_grads.node_weight += tr.node_agg.transpose() * grad_node_pre;
    layer_grads.node_bias += grad_node_pre.colwise().sum();

    Matrix grad_node_agg = grad_node_pre * layer.node_weight.transpose();
    Matrix grad_edge = aggregate_edges_to_nodes_adjoint(graph, grad_node_agg);
    if (k + 1 == num_layers) grad_edge += grad_edge_out;

    Matrix grad_edge_pre =
        grad_edge.cwiseProduct(activation_derivative(tr.edge_pre, act, layer.edge_slope(0, 0)));
    if (prelu) {
      layer_grads.edge_slope(0, 0) +=
          (tr.edge_pre.array() < 0.0).select(grad_edge.array() * tr.edge_pre.array(), 0.0).sum();
    }
    layer_grads.edge_weight += tr.edge_agg.transpose() * grad_edge_pre;
    layer_grads.edge_bias += grad_edge_pre.colwise().sum();

    if (k > 0) {
      Matrix grad_edge_agg = grad_edge_pre * layer.edge_weight.transpose();
      grad_node = aggregate_nodes_to_edges_adjoint(graph, grad_edge_agg);
    }
  }
}

struct ObjectiveResult {
  LossValue loss;
  ContrastiveLoss node;
  ContrastiveLoss edge;
};

ObjectiveResult run_objective(const Hypergraph& h, const FeatureMatrix& x,
                              const std::vector<NoiseView>& views, const ModelParameters& params,
                              const LossConfig& cfg, const LossContext& ctx, bool with_grad,
                              std::vector<Encoding>* encodings_out) {
  if (cfg.use_positive && views.empty())
    throw std::invalid_argument("loss: at least one noise view is required when positives are on");

  const bool with_trace = with_grad;
  std::vector<Encoding> encodings;
  encodings.push_back(run_forward(h, x, params, with_trace));
  if (cfg.use_positive) {
    for (const auto& view : views)
      encodings.push_back(
          run_forward(view_graph(view, h), view_features(view, x), params, with_trace));
  }

  ViewMasks node_masks, edge_masks;
  build_masks(views, h, node_masks, edge_masks);
  if (!cfg.use_positive) {
    node_masks.clear();
    edge_masks.clear();
  }

  std::vector<Matrix> z_views, y_views;
  for (std::size_t m = 1; m < encodings.size(); ++m) {
    z_views.push_back(encodings[m].node_proj);
    y_views.push_back(encodings[m].edge_proj);
  }

  ObjectiveResult result;
  result.node = node_contrastive_loss(encodings[0].node_proj, z_views, ctx.node_weights, cfg,
                                      node_masks.empty() ? nullptr : &node_masks, with_grad);
  result.loss.node = result.node.total;
  const double alpha = cfg.use_edge_loss ? cfg.alpha : 0.0;
  if (cfg.use_edge_loss) {
    result.edge = edge_contrastive_loss(encodings[0].edge_proj, y_views, ctx.edge_weights, cfg,
                                        edge_masks.empty() ? nullptr : &edge_masks,
                                        with_grad && alpha != 0.0);
    result.loss.edge = result.edge.total;
  }
  result.loss.total = total_loss(result.loss.node, result.loss.edge, cfg);
  if (encodings_out) *encodings_out = std::move(encodings);
  return result;
}

}  // namespace

LossValue evaluate_loss(const Hypergraph& h, const FeatureMatrix& x,
                        const std::vector<NoiseView>& views, const ModelParameters& params,
                        const LossConfig& cfg, const LossContext& ctx) {
  return run_objective(h, x, views, params, cfg, ctx, false, nullptr).loss;
}

BackwardResult backward(const Hypergraph& h, const FeatureMatrix& x,
                        const std::vector<NoiseView>& views, const ModelParameters& params,
                        const LossConfig& cfg, const LossContext& ctx) {
  std::vector<Encoding> encodings;
  ObjectiveResult obj = run_objective(h, x, views, params, cfg, ctx, true, &encodings);

  BackwardResult result;
  result.loss = obj.loss;
  result.grads = zeros_like(params);

  const double alpha = cfg.use_edge_loss ? cfg.alpha : 0.0;

  for (std::size_t m = 0; m < encodings.size(); ++m) {
    const Encoding& enc = encodings[m];
    const Matrix& grad_z = m == 0 ? obj.node.grad_origin : obj.node.grad_views[m - 1];
    Matrix grad_node_out = head_backward(grad_z, enc.node_embed, enc.proj_trace.node_hidden_pre,
                                         enc.proj_trace.node_hidden, params.projection.node_head,
                                         result.grads.projection.node_head);

    Matrix grad_edge_out = Matrix::Zero(enc.edge_embed.rows(), enc.edge_embed.cols());
    if (alpha != 0.0) {
      Matrix grad_y = alpha * (m == 0 ? obj.edge.grad_origin : obj.edge.grad_views[m - 1]);
      grad_edge_out = head_backward(grad_y, enc.edge_embed, enc.proj_trace.edge_hidden_pre,
                                    enc.proj_trace.edge_hidden, params.projection.edge_head,
                                    result.grads.projection.edge_head);
    }

    encoder_backward(enc, grad_node_out, grad_edge_out, params.encoder, result.grads.encoder);
  }

  for (const auto& [name, tensor] : parameter_tensors(result.grads)) {
    if (!tensor->allFinite())
      throw std::runtime_error("backward: non-finite gradient in " + name);
  }
  if (!std::isfinite(result.loss.total)) throw std::runtime_error("backward: non-finite loss");
  return result;
}

void adamw_step(ModelParameters& params, const GradientSet& grads, OptimizerState& state,
                const TrainConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));

  auto p = parameter_tensors(params);
  auto g = parameter_tensors(grads);
  auto m = parameter_tensors(state.first_moment);
  auto v = parameter_tensors(state.second_moment);
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size())
    throw std::invalid_argument("adamw_step: tensor layout mismatch");

  for (std::size_t t = 0; t < p.size(); ++t) {
    Matrix& param = *p[t].second;
    const Matrix& grad = *g[t].second;
    Matrix& m1 = *m[t].second;
    Matrix& m2 = *v[t].second;
    if (grad.rows() != param.rows() || grad.cols() != param.cols())
      throw std::invalid_argument("adamw_step: shape mismatch for " + p[t].first);

    m1 = cfg.adam_beta1 * m1 + (1.0 - cfg.adam_beta1) * grad;
    m2 = cfg.adam_beta2 * m2 + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
    Matrix update = (m1 / bc1).cwiseQuotient(((m2 / bc2).cwiseSqrt().array() + cfg.adam_eps).matrix());
    param -= cfg.learning_rate * update + cfg.learning_rate * cfg.weight_decay * param;
  }
}

TrainResult train(const Hypergraph& h, const FeatureMatrix& x, const TrainConfig& cfg,
                  const LabelVector* labels_for_logging, const EpochHook& hook) {
  cfg.validate();
  (void)labels_for_logging;  // unsupervised: labels never shape the run

  TrainResult result;
  result.params = init_parameters(cfg.encoder_dims(x.feature_dim()), cfg.proj_dim,
                                  rng::derive(cfg.master_seed, "model"), cfg.activation);
  OptimizerState state = OptimizerState::make(result.params);
  LossContext ctx = LossContext::make(h, cfg.loss);

  const std::uint64_t aug_base = rng::derive(cfg.master_seed, "augmentation");
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<NoiseView> views;
    if (cfg.loss.use_positive) {
      AugmentationSpec spec = cfg.augmentation;
      spec.seed = rng::derive(aug_base, "epoch", static_cast<std::uint64_t>(epoch));
      for (int mview = 0; mview < spec.num_views; ++mview)
        views.push_back(make_view(h, x, spec, mview));
    }

    BackwardResult bw;
    try {
      bw = backward(h, x, views, result.params, cfg.loss, ctx);
    } catch (const std::exception& e) {
      throw std::runtime_error("train: epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(bw.loss.total))
      throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));

    adamw_step(result.params, bw.grads, state, cfg);
    result.history.push_back({epoch, bw.loss.node, bw.loss.edge, bw.loss.total});
    if (hook && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
      hook(epoch, result.params);
  }
  return result;
}

}  // namespace hyfi

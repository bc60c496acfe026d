#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hyfi/augmentation.hpp"
#include "hyfi/encoder.hpp"
#include "hyfi/hypergraph.hpp"
#include "hyfi/loss.hpp"

namespace hyfi {

struct TrainConfig {
  int epochs = 300;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossConfig loss;
  AugmentationSpec augmentation;
  Index hidden_dim = 128;
  int num_layers = 1;
  Index proj_dim = 128;
  Activation activation = Activation::prelu;
  std::uint64_t master_seed = 0;
  int checkpoint_every = 0;  // 0: final checkpoint only

  void validate() const;
  std::vector<Index> encoder_dims(Index input_dim) const;
};

// Gradients mirror the parameter layout tensor-for-tensor.
using GradientSet = ModelParameters;

struct OptimizerState {
  ModelParameters first_moment;
  ModelParameters second_moment;
  std::int64_t step = 0;

  static OptimizerState make(const ModelParameters& params);
};

struct LossValue {
  double node = 0.0;
  double edge = 0.0;
  double total = 0.0;
};

struct BackwardResult {
  LossValue loss;
  GradientSet grads;
};

// Weak weights depend only on the origin graph; callers that loop epochs
// build them once and pass them in.
struct LossContext {
  WeakWeights node_weights;
  WeakWeights edge_weights;  // empty when the edge loss is disabled

  static LossContext make(const Hypergraph& h, const LossConfig& cfg);
};

// Forward pass of the full objective on origin + views.
LossValue evaluate_loss(const Hypergraph& h, const FeatureMatrix& x,
                        const std::vector<NoiseView>& views, const ModelParameters& params,
                        const LossConfig& cfg, const LossContext& ctx);

// Forward plus exact reverse-mode gradients of the total loss with respect
// to every parameter tensor. Encoder parameters are shared across the origin
// pass and every view pass; contributions accumulate in a fixed order.
BackwardResult backward(const Hypergraph& h, const FeatureMatrix& x,
                        const std::vector<NoiseView>& views, const ModelParameters& params,
                        const LossConfig& cfg, const LossContext& ctx);

// Decoupled-weight-decay Adam update:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   p <- p - lr * mhat / (sqrt(vhat) + eps) - lr * wd * p
void adamw_step(ModelParameters& params, const GradientSet& grads, OptimizerState& state,
                const TrainConfig& cfg);

struct LossRecord {
  int epoch;
  double node_loss;
  double edge_loss;
  double total_loss;
};

struct TrainResult {
  ModelParameters params;
  std::vector<LossRecord> history;
};

using EpochHook = std::function<void(int epoch, const ModelParameters& params)>;

// Full-batch epoch loop: encode origin, draw fresh noise views, encode them,
// compute the combined loss, step AdamW. Deterministic given master_seed.
// Labels never influence training; the parameter exists for callers that log
// dataset stats alongside the run.
TrainResult train(const Hypergraph& h, const FeatureMatrix& x, const TrainConfig& cfg,
                  const LabelVector* labels_for_logging = nullptr, const EpochHook& hook = {});

}  // namespace hyfi

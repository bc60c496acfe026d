#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hyfi/hypergraph.hpp"

namespace hyfi {

enum class Activation { relu, prelu, elu, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Two-phase message-passing encoder. Layer k maps node states through the
// hyperedge channel and back:
//   Q_k = act(agg_VE(P_{k-1}) * edge_weight + edge_bias)
//   P_k = act(agg_EV(Q_k)     * node_weight + node_bias)
// where agg_VE = D_E^-1 H^T D_V^-1/2 and agg_EV = D_V^-1/2 H, both applied
// sparsely through the adjacency lists. Inverse powers of zero degrees are
// zero, so isolated elements receive only the bias.
struct EncoderParameters {
  struct Layer {
    Matrix edge_weight;  // d_{k-1} x d_k
    Matrix edge_bias;    // 1 x d_k
    Matrix node_weight;  // d_k x d_k
    Matrix node_bias;    // 1 x d_k
    Matrix edge_slope;   // 1 x 1, prelu only
    Matrix node_slope;   // 1 x 1, prelu only
  };
  std::vector<Layer> layers;
  Activation activation = Activation::prelu;

  Index input_dim() const { return layers.empty() ? 0 : layers.front().edge_weight.rows(); }
  Index output_dim() const { return layers.empty() ? 0 : layers.back().node_weight.cols(); }
};

// Two independent two-layer heads with ELU hidden activation and no
// activation after the second affine layer.
struct ProjectionParameters {
  struct Head {
    Matrix w1;  // d_in x d_hidden
    Matrix b1;  // 1 x d_hidden
    Matrix w2;  // d_hidden x d_out
    Matrix b2;  // 1 x d_out
  };
  Head node_head;
  Head edge_head;
};

struct ModelParameters {
  EncoderParameters encoder;
  ProjectionParameters projection;
};

struct ViewEmbeddings {
  Matrix node_embed;  // P, |V| x d
  Matrix edge_embed;  // Q, |E| x d
  Matrix node_proj;   // Z
  Matrix edge_proj;   // Y
};

// Stable enumeration of every trainable tensor, used by the optimizer, the
// gradient set, and the checkpoint container. PReLU slopes are included only
// when the activation is prelu.
std::vector<std::pair<std::string, Matrix*>> parameter_tensors(ModelParameters& params);
std::vector<std::pair<std::string, const Matrix*>> parameter_tensors(const ModelParameters& params);

ModelParameters zeros_like(const ModelParameters& params);

// Glorot-uniform weights, zero biases, PReLU slopes at 0.25; deterministic
// given seed. dims = [input_dim, layer1_dim, ..., layerL_dim].
ModelParameters init_parameters(const std::vector<Index>& dims, Index proj_dim, std::uint64_t seed,
                                Activation activation = Activation::prelu);

// Per-encoding cache of intermediates consumed by the backward pass.
struct EncoderTrace {
  struct LayerTrace {
    Matrix edge_agg;   // agg_VE(P_{k-1})
    Matrix edge_pre;   // pre-activation of Q_k
    Matrix node_agg;   // agg_EV(Q_k)
    Matrix node_pre;   // pre-activation of P_k
  };
  std::vector<LayerTrace> layers;
};

struct ProjectionTrace {
  Matrix node_hidden_pre;  // P * w1 + b1
  Matrix edge_hidden_pre;
  Matrix node_hidden;      // elu of the above
  Matrix edge_hidden;
};

// Sparse two-phase forward; returns (P, Q). Fills `trace` when non-null.
std::pair<Matrix, Matrix> encoder_forward(const Hypergraph& h, const FeatureMatrix& x,
                                          const EncoderParameters& params,
                                          EncoderTrace* trace = nullptr);

std::pair<Matrix, Matrix> project(const Matrix& node_embed, const Matrix& edge_embed,
                                  const ProjectionParameters& params,
                                  ProjectionTrace* trace = nullptr);

ViewEmbeddings encode_view(const Hypergraph& h, const FeatureMatrix& x, const ModelParameters& params);

// Sparse aggregation primitives (exposed for the training module and tests).
Matrix aggregate_nodes_to_edges(const Hypergraph& h, const Matrix& node_states);
Matrix aggregate_edges_to_nodes(const Hypergraph& h, const Matrix& edge_states);
Matrix aggregate_nodes_to_edges_adjoint(const Hypergraph& h, const Matrix& edge_grad);
Matrix aggregate_edges_to_nodes_adjoint(const Hypergraph& h, const Matrix& node_grad);

Matrix apply_activation(const Matrix& pre, Activation act, double slope);
// d(act)/d(pre), elementwise, evaluated from the pre-activation values.
Matrix activation_derivative(const Matrix& pre, Activation act, double slope);

}  // namespace hyfi

#include "hyfi/encoder.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hyfi/rng.hpp"

namespace hyfi {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::prelu: return "prelu";
    case Activation::elu: return "elu";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "prelu") return Activation::prelu;
  if (name == "elu") return Activation::elu;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("config error: unknown activation '" + name + "'");
}

std::vector<std::pair<std::string, Matrix*>> parameter_tensors(ModelParameters& params) {
  std::vector<std::pair<std::string, Matrix*>> out;
  const bool prelu = params.encoder.activation == Activation::prelu;
  for (std::size_t k = 0; k < params.encoder.layers.size(); ++k) {
    auto& layer = params.encoder.layers[k];
    std::string base = "encoder.layer" + std::to_string(k) + ".";
    out.emplace_back(base + "edge_weight", &layer.edge_weight);
    out.emplace_back(base + "edge_bias", &layer.edge_bias);
    out.emplace_back(base + "node_weight", &layer.node_weight);
    out.emplace_back(base + "node_bias", &layer.node_bias);
    if (prelu) {
      out.emplace_back(base + "edge_slope", &layer.edge_slope);
      out.emplace_back(base + "node_slope", &layer.node_slope);
    }
  }
  for (auto [name, head] : {std::pair{"node_head", &params.projection.node_head},
                            std::pair{"edge_head", &params.projection.edge_head}}) {
    std::string base = std::string("projection.") + name + ".";
    out.emplace_back(base + "w1", &head->w1);
    out.emplace_back(base + "b1", &head->b1);
    out.emplace_back(base + "w2", &head->w2);
    out.emplace_back(base + "b2", &head->b2);
  }
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> parameter_tensors(const ModelParameters& params) {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, tensor] : parameter_tensors(const_cast<ModelParameters&>(params)))
    out.emplace_back(name, tensor);
  return out;
}

ModelParameters zeros_like(const ModelParameters& params) {
  ModelParameters out = params;
  for (auto& [name, tensor] : parameter_tensors(out)) tensor->setZero();
  // Slopes of non-prelu models are untouched by the tensor walk; zero them too
  // so the struct is a clean accumulator.
  for (auto& layer : out.encoder.layers) {
    if (params.encoder.activation != Activation::prelu) {
      layer.edge_slope.setZero();
      layer.node_slope.setZero();
    }
  }
  return out;
}

namespace {

Matrix glorot(Index rows, Index cols, std::mt19937_64& engine) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(engine);
  return m;
}

}  // namespace

ModelParameters init_parameters(const std::vector<Index>& dims, Index proj_dim, std::uint64_t seed,
                                Activation activation) {
  if (dims.size() < 2) throw std::invalid_argument("init_parameters: need input and at least one layer dim");
  for (Index d : dims)
    if (d <= 0) throw std::invalid_argument("init_parameters: dimensions must be positive");
  if (proj_dim <= 0) throw std::invalid_argument("init_parameters: proj_dim must be positive");

  auto engine = rng::make_engine(rng::derive(seed, "init"));

  ModelParameters params;
  params.encoder.activation = activation;
  for (std::size_t k = 1; k < dims.size(); ++k) {
    EncoderParameters::Layer layer;
    layer.edge_weight = glorot(dims[k - 1], dims[k], engine);
    layer.edge_bias = Matrix::Zero(1, dims[k]);
    layer.node_weight = glorot(dims[k], dims[k], engine);
    layer.node_bias = Matrix::Zero(1, dims[k]);
    layer.edge_slope = Matrix::Constant(1, 1, 0.25);
    layer.node_slope = Matrix::Constant(1, 1, 0.25);
    params.encoder.layers.push_back(std::move(layer));
  }

  const Index d_out = dims.back();
  for (ProjectionParameters::Head* head : {&params.projection.node_head, &params.projection.edge_head}) {
    head->w1 = glorot(d_out, proj_dim, engine);
    head->b1 = Matrix::Zero(1, proj_dim);
    head->w2 = glorot(proj_dim, proj_dim, engine);
    head->b2 = Matrix::Zero(1, proj_dim);
  }
  return params;
}

Matrix aggregate_nodes_to_edges(const Hypergraph& h, const Matrix& node_states) {
  Matrix out = Matrix::Zero(h.num_hyperedges(), node_states.cols());
  const auto& node_deg = h.node_degree();
  const auto& edge_deg = h.hyperedge_degree();
  for (Index e = 0; e < h.num_hyperedges(); ++e) {
    int deg = edge_deg[static_cast<std::size_t>(e)];
    if (deg == 0) continue;
    auto row = out.row(e);
    for (int v : h.hyperedge_members(e)) {
      int dv = node_deg[static_cast<std::size_t>(v)];
      if (dv == 0) continue;
      row += node_states.row(v) / std::sqrt(static_cast<double>(dv));
    }
    row /= static_cast<double>(deg);
  }
  return out;
}

Matrix aggregate_edges_to_nodes(const Hypergraph& h, const Matrix& edge_states) {
  Matrix out = Matrix::Zero(h.num_nodes(), edge_states.cols());
  const auto& node_deg = h.node_degree();
  for (Index v = 0; v < h.num_nodes(); ++v) {
    int dv = node_deg[static_cast<std::size_t>(v)];
    if (dv == 0) continue;
    auto row = out.row(v);
    for (int e : h.node_memberships(v)) row += edge_states.row(e);
    row /= std::sqrt(static_cast<double>(dv));
  }
  return out;
}

Matrix aggregate_nodes_to_edges_adjoint(const Hypergraph& h, const Matrix& edge_grad) {
  // (D_E^-1 H^T D_V^-1/2)^T = D_V^-1/2 H D_E^-1
  Matrix out = Matrix::Zero(h.num_nodes(), edge_grad.cols());
  const auto& node_deg = h.node_degree();
  const auto& edge_deg = h.hyperedge_degree();
  for (Index v = 0; v < h.num_nodes(); ++v) {
    int dv = node_deg[static_cast<std::size_t>(v)];
    if (dv == 0) continue;
    auto row = out.row(v);
    for (int e : h.node_memberships(v)) {
      int de = edge_deg[static_cast<std::size_t>(e)];
      if (de == 0) continue;
      row += edge_grad.row(e) / static_cast<double>(de);
    }
    row /= std::sqrt(static_cast<double>(dv));
  }
  return out;
}

Matrix aggregate_edges_to_nodes_adjoint(const Hypergraph& h, const Matrix& node_grad) {
  // (D_V^-1/2 H)^T = H^T D_V^-1/2
  Matrix out = Matrix::Zero(h.num_hyperedges(), node_grad.cols());
  const auto& node_deg = h.node_degree();
  for (Index e = 0; e < h.num_hyperedges(); ++e) {
    auto row = out.row(e);
    for (int v : h.hyperedge_members(e)) {
      int dv = node_deg[static_cast<std::size_t>(v)];
      if (dv == 0) continue;
      row += node_grad.row(v) / std::sqrt(static_cast<double>(dv));
    }
  }
  return out;
}

Matrix apply_activation(const Matrix& pre, Activation act, double slope) {
  switch (act) {
    case Activation::identity:
      return pre;
    case Activation::relu:
      return pre.cwiseMax(0.0);
    case Activation::prelu:
      return pre.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
    case Activation::elu:
      return pre.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
  }
  return pre;
}

Matrix activation_derivative(const Matrix& pre, Activation act, double slope) {
  switch (act) {
    case Activation::identity:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::relu:
      return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::prelu:
      return pre.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
    case Activation::elu:
      return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

std::pair<Matrix, Matrix> encoder_forward(const Hypergraph& h, const FeatureMatrix& x,
                                          const EncoderParameters& params, EncoderTrace* trace) {
  if (x.values.rows() != h.num_nodes())
    throw std::invalid_argument("encoder_forward: feature rows != num_nodes");
  if (params.layers.empty()) throw std::invalid_argument("encoder_forward: no layers");
  if (params.input_dim() != x.values.cols())
    throw std::invalid_argument("encoder_forward: feature dim " + std::to_string(x.values.cols()) +
                                " does not chain with encoder input dim " +
                                std::to_string(params.input_dim()));

  if (trace) trace->layers.clear();

  Matrix node_states = x.values;
  Matrix edge_states;
  for (const auto& layer : params.layers) {
    if (layer.edge_weight.rows() != node_states.cols())
      throw std::invalid_argument("encoder_forward: layer dimension mismatch");
    Matrix edge_agg = aggregate_nodes_to_edges(h, node_states);
    Matrix edge_pre = edge_agg * layer.edge_weight;
    edge_pre.rowwise() += layer.edge_bias.row(0);
    edge_states = apply_activation(edge_pre, params.activation, layer.edge_slope(0, 0));

    Matrix node_agg = aggregate_edges_to_nodes(h, edge_states);
    Matrix node_pre = node_agg * layer.node_weight;
    node_pre.rowwise() += layer.node_bias.row(0);
    node_states = apply_activation(node_pre, params.activation, layer.node_slope(0, 0));

    if (trace) {
      trace->layers.push_back(
          {std::move(edge_agg), std::move(edge_pre), std::move(node_agg), std::move(node_pre)});
    }
  }

  if (!node_states.allFinite() || !edge_states.allFinite())
    throw std::runtime_error("encoder_forward: non-finite output (exploded parameters)");
  return {std::move(node_states), std::move(edge_states)};
}

namespace {

Matrix head_forward(const Matrix& input, const ProjectionParameters::Head& head, Matrix* hidden_pre,
                    Matrix* hidden_out) {
  if (head.w1.rows() != input.cols())
    throw std::invalid_argument("project: input dim does not match head");
  Matrix pre = input * head.w1;
  pre.rowwise() += head.b1.row(0);
  Matrix hidden = apply_activation(pre, Activation::elu, 0.0);
  Matrix out = hidden * head.w2;
  out.rowwise() += head.b2.row(0);
  if (hidden_pre) *hidden_pre = std::move(pre);
  if (hidden_out) *hidden_out = std::move(hidden);
  return out;
}

}  // namespace

std::pair<Matrix, Matrix> project(const Matrix& node_embed, const Matrix& edge_embed,
                                  const ProjectionParameters& params, ProjectionTrace* trace) {
  Matrix z = head_forward(node_embed, params.node_head, trace ? &trace->node_hidden_pre : nullptr,
                          trace ? &trace->node_hidden : nullptr);
  Matrix y = head_forward(edge_embed, params.edge_head, trace ? &trace->edge_hidden_pre : nullptr,
                          trace ? &trace->edge_hidden : nullptr);
  return {std::move(z), std::move(y)};
}

ViewEmbeddings encode_view(const Hypergraph& h, const FeatureMatrix& x, const ModelParameters& params) {
  ViewEmbeddings out;
  std::tie(out.node_embed, out.edge_embed) = encoder_forward(h, x, params.encoder);
  std::tie(out.node_proj, out.edge_proj) = project(out.node_embed, out.edge_embed, params.projection);
  return out;
}

}  // namespace hyfi

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hyfi/encoder.hpp"
#include "hyfi/rng.hpp"
#include "support/datagen.hpp"
#include "support/oracles.hpp"

using namespace hyfi;
namespace ts = hyfi::testsupport;

namespace {

Hypergraph toy_graph() { return Hypergraph::from_hyperedges(3, {{0, 1}, {0, 2}}); }

bool same_bytes(const ModelParameters& a, const ModelParameters& b) {
  auto ta = parameter_tensors(a);
  auto tb = parameter_tensors(b);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].first != tb[i].first) return false;
    if (*ta[i].second != *tb[i].second) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("init is deterministic and biases start at zero") {
  ModelParameters a = init_parameters({4, 8}, 8, 42);
  ModelParameters b = init_parameters({4, 8}, 8, 42);
  CHECK(same_bytes(a, b));

  ModelParameters c = init_parameters({4, 8}, 8, 43);
  CHECK(!same_bytes(a, c));

  CHECK(a.encoder.layers[0].edge_bias.isZero(0.0));
  CHECK(a.encoder.layers[0].node_bias.isZero(0.0));
  CHECK(a.projection.node_head.b1.isZero(0.0));
  CHECK(a.projection.edge_head.b2.isZero(0.0));
}

TEST_CASE("glorot bound holds for fan_in=4, fan_out=8") {
  const double bound = std::sqrt(6.0 / 12.0);
  ModelParameters params = init_parameters({4, 8}, 8, 7);
  const Matrix& w = params.encoder.layers[0].edge_weight;
  CHECK(w.rows() == 4);
  CHECK(w.cols() == 8);
  CHECK(w.maxCoeff() <= bound);
  CHECK(w.minCoeff() >= -bound);
  CHECK(w.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("init rejects bad dimensions") {
  CHECK_THROWS_AS(init_parameters({4, 0}, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_parameters({-1, 4}, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_parameters({4}, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_parameters({4, 4}, 0, 1), std::invalid_argument);
}

TEST_CASE("zero input with zero biases propagates zeros through relu") {
  Hypergraph h = toy_graph();
  ModelParameters params = init_parameters({2, 4}, 4, 3, Activation::relu);
  FeatureMatrix x{Matrix::Zero(3, 2)};
  auto [p, q] = encoder_forward(h, x, params.encoder);
  CHECK(p.isZero(0.0));
  CHECK(q.isZero(0.0));
}

TEST_CASE("toy forward matches the hand-evaluated two-phase rule") {
  Hypergraph h = toy_graph();
  EncoderParameters enc;
  enc.activation = Activation::identity;
  EncoderParameters::Layer layer;
  layer.edge_weight = Matrix::Constant(1, 1, 1.0);
  layer.edge_bias = Matrix::Zero(1, 1);
  layer.node_weight = Matrix::Constant(1, 1, 1.0);
  layer.node_bias = Matrix::Zero(1, 1);
  layer.edge_slope = Matrix::Constant(1, 1, 0.25);
  layer.node_slope = Matrix::Constant(1, 1, 0.25);
  enc.layers.push_back(layer);

  FeatureMatrix x{Matrix::Ones(3, 1)};
  auto [p, q] = encoder_forward(h, x, enc);

  const double qv = (1.0 / std::sqrt(2.0) + 1.0) / 2.0;  // 0.85355...
  CHECK(q(0, 0) == doctest::Approx(qv).epsilon(1e-12));
  CHECK(q(1, 0) == doctest::Approx(qv).epsilon(1e-12));
  CHECK(p(0, 0) == doctest::Approx(2.0 * qv / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(p(1, 0) == doctest::Approx(qv).epsilon(1e-12));
  CHECK(p(2, 0) == doctest::Approx(qv).epsilon(1e-12));
}

TEST_CASE("isolated nodes receive only the bias") {
  Hypergraph h = Hypergraph::from_hyperedges(3, {{0, 1}});  // node 2 isolated
  EncoderParameters enc;
  enc.activation = Activation::identity;
  EncoderParameters::Layer layer;
  layer.edge_weight = Matrix::Constant(1, 2, 1.0);
  layer.edge_bias = Matrix::Zero(1, 2);
  layer.node_weight = Matrix::Identity(2, 2);
  layer.node_bias = (Matrix(1, 2) << 0.5, -0.25).finished();
  layer.edge_slope = Matrix::Constant(1, 1, 0.25);
  layer.node_slope = Matrix::Constant(1, 1, 0.25);
  enc.layers.push_back(layer);

  FeatureMatrix x{Matrix::Ones(3, 1)};
  auto [p, q] = encoder_forward(h, x, enc);
  (void)q;
  CHECK(p(2, 0) == doctest::Approx(0.5));
  CHECK(p(2, 1) == doctest::Approx(-0.25));
}

TEST_CASE("dimension mismatches are reported") {
  Hypergraph h = toy_graph();
  ModelParameters params = init_parameters({4, 8}, 8, 3);
  FeatureMatrix x{Matrix::Zero(3, 5)};
  CHECK_THROWS_AS(encoder_forward(h, x, params.encoder), std::invalid_argument);
  FeatureMatrix wrong_rows{Matrix::Zero(2, 4)};
  CHECK_THROWS_AS(encoder_forward(h, wrong_rows, params.encoder), std::invalid_argument);
}

TEST_CASE("sparse forward equals the dense oracle") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Hypergraph h = ts::random_hypergraph(
        {.max_nodes = 20, .max_edges = 20, .max_edge_size = 5, .seed = seed});
    const Index d_in = 3 + static_cast<Index>(seed % 3);
    const auto act = static_cast<Activation>(seed % 4);
    ModelParameters params =
        init_parameters({d_in, 4, 5}, 4, seed * 7 + 1, act);  // two layers
    // nonzero biases and slopes to exercise every term
    for (auto& layer : params.encoder.layers) {
      layer.edge_bias.setConstant(0.1);
      layer.node_bias.setConstant(-0.05);
      layer.edge_slope.setConstant(0.3);
      layer.node_slope.setConstant(0.2);
    }
    Matrix x = ts::random_features(h.num_nodes(), d_in, seed + 1000, -1.0, 1.0);

    auto [p, q] = encoder_forward(h, FeatureMatrix{x}, params.encoder);
    auto [pd, qd] = ts::dense_encoder_forward(h, x, params.encoder);

    REQUIRE(p.rows() == pd.rows());
    const double scale_p = std::max(1.0, pd.cwiseAbs().maxCoeff());
    const double scale_q = std::max(1.0, qd.cwiseAbs().maxCoeff());
    CHECK((p - pd).cwiseAbs().maxCoeff() / scale_p < 1e-10);
    CHECK((q - qd).cwiseAbs().maxCoeff() / scale_q < 1e-10);
  }
}

TEST_CASE("output shapes follow the layer dims") {
  Hypergraph h = ts::random_hypergraph({.max_nodes = 15, .max_edges = 12, .seed = 9});
  ModelParameters params = init_parameters({6, 7, 3}, 5, 2);
  Matrix x = ts::random_features(h.num_nodes(), 6, 10);
  auto [p, q] = encoder_forward(h, FeatureMatrix{x}, params.encoder);
  CHECK(p.rows() == h.num_nodes());
  CHECK(p.cols() == 3);
  CHECK(q.rows() == h.num_hyperedges());
  CHECK(q.cols() == 3);
}

TEST_CASE("permutation equivariance") {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    Hypergraph h = ts::random_hypergraph({.max_nodes = 10, .max_edges = 8, .seed = seed});
    const Index n = h.num_nodes(), m = h.num_hyperedges();
    Matrix x = ts::random_features(n, 4, seed);
    ModelParameters params = init_parameters({4, 5}, 5, seed);

    std::vector<int> node_perm(static_cast<std::size_t>(n)), edge_perm(static_cast<std::size_t>(m));
    std::iota(node_perm.begin(), node_perm.end(), 0);
    std::iota(edge_perm.begin(), edge_perm.end(), 0);
    auto engine = rng::make_engine(seed + 99);
    std::shuffle(node_perm.begin(), node_perm.end(), engine);
    std::shuffle(edge_perm.begin(), edge_perm.end(), engine);

    std::vector<std::vector<int>> edges(static_cast<std::size_t>(m));
    for (Index e = 0; e < m; ++e) {
      std::vector<int> members;
      for (int v : h.hyperedge_members(e)) members.push_back(node_perm[static_cast<std::size_t>(v)]);
      edges[static_cast<std::size_t>(edge_perm[static_cast<std::size_t>(e)])] = std::move(members);
    }
    Hypergraph hp = Hypergraph::from_hyperedges(n, std::move(edges));
    Matrix xp(n, 4);
    for (Index v = 0; v < n; ++v) xp.row(node_perm[static_cast<std::size_t>(v)]) = x.row(v);

    auto [p, q] = encoder_forward(h, FeatureMatrix{x}, params.encoder);
    auto [pp, qp] = encoder_forward(hp, FeatureMatrix{xp}, params.encoder);

    for (Index v = 0; v < n; ++v)
      CHECK((p.row(v) - pp.row(node_perm[static_cast<std::size_t>(v)])).cwiseAbs().maxCoeff() <
            1e-10);
    for (Index e = 0; e < m; ++e)
      CHECK((q.row(e) - qp.row(edge_perm[static_cast<std::size_t>(e)])).cwiseAbs().maxCoeff() <
            1e-10);
  }
}

TEST_CASE("identity single layer with zero biases is linear in the features") {
  Hypergraph h = ts::random_hypergraph({.max_nodes = 12, .max_edges = 10, .seed = 77});
  ModelParameters params = init_parameters({3, 4}, 4, 5, Activation::identity);
  Matrix x1 = ts::random_features(h.num_nodes(), 3, 1);
  Matrix x2 = ts::random_features(h.num_nodes(), 3, 2);
  const double a = 0.7, b = -1.3;

  auto [p1, q1] = encoder_forward(h, FeatureMatrix{x1}, params.encoder);
  auto [p2, q2] = encoder_forward(h, FeatureMatrix{x2}, params.encoder);
  auto [pc, qc] = encoder_forward(h, FeatureMatrix{a * x1 + b * x2}, params.encoder);

  CHECK((pc - (a * p1 + b * p2)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((qc - (a * q1 + b * q2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("projection heads") {
  SUBCASE("all-zero parameters map to zero") {
    ProjectionParameters proj;
    for (auto* head : {&proj.node_head, &proj.edge_head}) {
      head->w1 = Matrix::Zero(3, 3);
      head->b1 = Matrix::Zero(1, 3);
      head->w2 = Matrix::Zero(3, 3);
      head->b2 = Matrix::Zero(1, 3);
    }
    Matrix p = ts::random_features(4, 3, 8);
    auto [z, y] = project(p, p, proj);
    CHECK(z.isZero(0.0));
    CHECK(y.isZero(0.0));
  }

  SUBCASE("identity-shaped head passes nonnegative inputs through") {
    ProjectionParameters proj;
    for (auto* head : {&proj.node_head, &proj.edge_head}) {
      head->w1 = Matrix::Identity(3, 3);
      head->b1 = Matrix::Zero(1, 3);
      head->w2 = Matrix::Identity(3, 3);
      head->b2 = Matrix::Zero(1, 3);
    }
    Matrix p = ts::random_features(5, 3, 9, 0.0, 2.0);
    auto [z, y] = project(p, p, proj);
    CHECK((z - p).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((y - p).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("negative inputs pass through the ELU hidden layer") {
    ProjectionParameters proj;
    for (auto* head : {&proj.node_head, &proj.edge_head}) {
      head->w1 = Matrix::Identity(1, 1);
      head->b1 = Matrix::Zero(1, 1);
      head->w2 = Matrix::Identity(1, 1);
      head->b2 = Matrix::Zero(1, 1);
    }
    Matrix p = Matrix::Constant(1, 1, -1.0);
    auto [z, y] = project(p, p, proj);
    (void)y;
    CHECK(z(0, 0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
  }
}

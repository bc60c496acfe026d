#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyfi/hypergraph.hpp"

namespace hyfi {

struct LossConfig {
  double tau_node = 0.5;
  double tau_edge = 0.5;
  double alpha = 1.0;  // edge-loss weight
  bool use_weak_positive = true;
  bool use_positive = true;
  bool use_weak_weight = true;  // false: w_ij = 1 for every sharing pair
  bool use_edge_loss = true;

  void validate() const;
};

// Per-anchor weights for sharing pairs: w_ij = C_ij^2 / C_ii where C is the
// overlap matrix. Rows are not symmetric; sparsity matches the off-diagonal
// of the overlap matrix.
class WeakWeights {
 public:
  struct Entry {
    std::int32_t col;
    double weight;
  };

  Index size() const { return static_cast<Index>(offsets_.size()) - 1; }

  std::span<const Entry> row(Index i) const {
    auto begin = offsets_[static_cast<std::size_t>(i)];
    auto end = offsets_[static_cast<std::size_t>(i) + 1];
    return {entries_.data() + begin, static_cast<std::size_t>(end - begin)};
  }

  friend WeakWeights weak_weights(const OverlapMatrix& om);

 private:
  std::vector<std::int64_t> offsets_{0};
  std::vector<Entry> entries_;
};

WeakWeights weak_weights(const OverlapMatrix& om);

// Per-view participation masks. Empty vector means every element takes part.
// Drop-style views set 0 for elements whose degree in the view's graph is
// zero: their view embedding is input-independent, so the same-index pair
// carries no signal and is excluded from the positive sum.
using ViewMasks = std::vector<std::vector<std::uint8_t>>;

struct ContrastiveLoss {
  double total = 0.0;
  Eigen::VectorXd per_anchor;
  // Populated when gradients are requested: d(total)/d(embedding rows).
  Matrix grad_origin;
  std::vector<Matrix> grad_views;
};

// Weak-positive group-unit contrastive loss over projected embeddings.
// Anchors, weak positives, and negatives live in the origin view; positives
// are the same-index rows of the noise views. For anchor i:
//   pos(i)  = sum_m exp(sim(z_i, z'_mi)/tau)
//   weak(i) = sum_{j in N(i)} w_ij exp(sim(z_i, z_j)/tau)
//   neg(i)  = sum_{j not in N(i), j != i} exp(sim(z_i, z_j)/tau)
//   L(i)    = -log((pos + weak) / (pos + weak + neg))
// computed as log1p(neg/(pos+weak)) with per-anchor max-shifted exponents.
ContrastiveLoss node_contrastive_loss(const Matrix& z, const std::vector<Matrix>& z_views,
                                      const WeakWeights& ww, const LossConfig& cfg,
                                      const ViewMasks* masks = nullptr, bool with_grad = false);

ContrastiveLoss edge_contrastive_loss(const Matrix& y, const std::vector<Matrix>& y_views,
                                      const WeakWeights& ww_edge, const LossConfig& cfg,
                                      const ViewMasks* masks = nullptr, bool with_grad = false);

double total_loss(double node_total, double edge_total, const LossConfig& cfg);

}  // namespace hyfi

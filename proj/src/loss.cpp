#include "hyfi/loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hyfi {

void LossConfig::validate() const {
  if (tau_node <= 0 || tau_edge <= 0)
    throw std::invalid_argument("config error: temperatures must be positive");
  if (alpha < 0) throw std::invalid_argument("config error: alpha must be >= 0");
  if (!use_weak_positive && !use_positive)
    throw std::invalid_argument(
        "config error: use_weak_positive and use_positive cannot both be off");
}

WeakWeights weak_weights(const OverlapMatrix& om) {
  WeakWeights ww;
  ww.offsets_.assign(1, 0);
  ww.offsets_.reserve(static_cast<std::size_t>(om.size()) + 1);
  ww.entries_.reserve(static_cast<std::size_t>(om.num_offdiagonal_entries()));
  for (Index i = 0; i < om.size(); ++i) {
    auto row = om.row(i);
    const double diag = static_cast<double>(om.diagonal(i));
    if (!row.empty() && diag == 0.0)
      throw std::invalid_argument("weak_weights: zero diagonal with nonzero off-diagonal at row " +
                                  std::to_string(i) + " (corrupt overlap matrix)");
    for (const auto& e : row) {
      const double c = static_cast<double>(e.count);
      ww.entries_.push_back({e.col, c * (c / diag)});
    }
    ww.offsets_.push_back(static_cast<std::int64_t>(ww.entries_.size()));
  }
  return ww;
}

double total_loss(double node_total, double edge_total, const LossConfig& cfg) {
  if (!std::isfinite(node_total) || !std::isfinite(edge_total))
    throw std::invalid_argument("total_loss: non-finite input");
  const double alpha = cfg.use_edge_loss ? cfg.alpha : 0.0;
  return node_total + alpha * edge_total;
}

namespace {

constexpr Index kBlock = 512;

struct AnchorStats {
  double shift;   // per-anchor max exponent
  double pw;      // pos + weak, shifted units
  double neg;     // shifted units
};

Eigen::VectorXd row_norms_checked(const Matrix& m, const std::vector<std::uint8_t>* mask,
                                  const char* what) {
  Eigen::VectorXd norms = m.rowwise().norm();
  for (Index i = 0; i < m.rows(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
    if (norms[i] == 0.0)
      throw std::runtime_error(std::string("contrastive loss: zero-norm ") + what +
                               " embedding row " + std::to_string(i));
  }
  return norms;
}

Matrix normalize_rows(const Matrix& m, const Eigen::VectorXd& norms,
                      const std::vector<std::uint8_t>* mask) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
    out.row(i) = m.row(i) / norms[i];
  }
  return out;
}

// Shared engine for the node- and edge-level losses. Blocked over anchors so
// the all-pairs similarity matrix is never held whole; per-anchor sums are
// accumulated in a fixed order for bitwise reproducibility.
ContrastiveLoss contrast(const Matrix& origin, const std::vector<Matrix>& views,
                         const WeakWeights& ww, const LossConfig& cfg, double tau,
                         const ViewMasks* masks, bool with_grad) {
  cfg.validate();
  const Index n = origin.rows();
  if (ww.size() != n)
    throw std::invalid_argument("contrastive loss: weak-weight size " + std::to_string(ww.size()) +
                                " does not match embedding rows " + std::to_string(n));
  const std::size_t num_views = views.size();
  for (const auto& v : views)
    if (v.rows() != n || v.cols() != origin.cols())
      throw std::invalid_argument("contrastive loss: view embedding shape mismatch");
  if (masks && masks->size() != num_views)
    throw std::invalid_argument("contrastive loss: mask count does not match view count");

  auto view_mask = [&](std::size_t m) -> const std::vector<std::uint8_t>* {
    if (!masks || (*masks)[m].empty()) return nullptr;
    return &(*masks)[m];
  };
  auto in_view = [&](std::size_t m, Index i) {
    const auto* vm = view_mask(m);
    return !vm || (*vm)[static_cast<std::size_t>(i)];
  };

  const Eigen::VectorXd origin_norms = row_norms_checked(origin, nullptr, "origin");
  const Matrix origin_hat = normalize_rows(origin, origin_norms, nullptr);

  std::vector<Eigen::VectorXd> view_norms(num_views);
  std::vector<Matrix> view_hat(num_views);
  for (std::size_t m = 0; m < num_views; ++m) {
    view_norms[m] = row_norms_checked(views[m], view_mask(m), "view");
    view_hat[m] = normalize_rows(views[m], view_norms[m], view_mask(m));
  }

  // Same-index cross-view exponents u'(i,m) = sim(z_i, z'_mi)/tau.
  Matrix cross(n, static_cast<Index>(num_views));
  for (std::size_t m = 0; m < num_views; ++m)
    cross.col(static_cast<Index>(m)) =
        (origin_hat.cwiseProduct(view_hat[m])).rowwise().sum() / tau;

  ContrastiveLoss result;
  result.per_anchor.resize(n);
  std::vector<AnchorStats> stats(static_cast<std::size_t>(n));

  double total = 0.0;
  Eigen::ArrayXd expvals(n);
  for (Index b0 = 0; b0 < n; b0 += kBlock) {
    const Index bs = std::min(kBlock, n - b0);
    // gram(r, j) = sim(anchor b0+r, j); rows contiguous per anchor.
    Matrix gram = origin_hat.middleRows(b0, bs) * origin_hat.transpose();
    for (Index r = 0; r < bs; ++r) {
      const Index i = b0 + r;
      const auto weak_row = ww.row(i);

      // The self-similarity on the diagonal bounds every term, so it is a
      // valid shift even for terms a flag later excludes.
      double shift = gram.row(r).maxCoeff() / tau;
      if (cfg.use_positive)
        for (std::size_t m = 0; m < num_views; ++m)
          shift = std::max(shift, cross(i, static_cast<Index>(m)));

      expvals = (gram.row(r).transpose().array() / tau - shift).exp();

      double pos = 0.0;
      if (cfg.use_positive) {
        for (std::size_t m = 0; m < num_views; ++m)
          if (in_view(m, i)) pos += std::exp(cross(i, static_cast<Index>(m)) - shift);
      }
      // weak positives are read then zeroed so the vectorized remainder sum
      // is a direct sum of exactly the negative terms
      double weak = 0.0;
      for (const auto& e : weak_row) {
        if (cfg.use_weak_positive)
          weak += (cfg.use_weak_weight ? e.weight : 1.0) * expvals[e.col];
        expvals[e.col] = 0.0;
      }
      expvals[i] = 0.0;
      const double neg = expvals.sum();

      const double pw = pos + weak;
      if (pw <= 0.0)
        throw std::runtime_error("contrastive loss: anchor " + std::to_string(i) +
                                 " has zero positive and weak-positive mass (configuration error)");
      const double li = std::log1p(neg / pw);
      result.per_anchor[i] = li;
      total += li;
      stats[static_cast<std::size_t>(i)] = {shift, pw, neg};
    }
  }
  result.total = total;
  if (!with_grad) return result;

  // Backward. For anchor i, in shifted units:
  //   dL/d(pos or weak term) = -neg / (pw * (pw + neg))
  //   dL/d(neg term)         =  1 / (pw + neg)
  // and each exponent contributes exp(u - shift) * coef / tau to d(total)/d(sim).
  Matrix grad_origin_hat = Matrix::Zero(n, origin.cols());
  std::vector<Matrix> grad_view_hat(num_views);
  for (std::size_t m = 0; m < num_views; ++m)
    grad_view_hat[m] = Matrix::Zero(n, origin.cols());

  Matrix coef(kBlock, n);
  for (Index b0 = 0; b0 < n; b0 += kBlock) {
    const Index bs = std::min(kBlock, n - b0);
    Matrix gram = origin_hat.middleRows(b0, bs) * origin_hat.transpose();
    for (Index r = 0; r < bs; ++r) {
      const Index i = b0 + r;
      const auto& st = stats[static_cast<std::size_t>(i)];
      const double pos_coef = -st.neg / (st.pw * (st.pw + st.neg)) / tau;
      const double neg_coef = 1.0 / (st.pw + st.neg) / tau;

      const auto weak_row = ww.row(i);
      coef.row(r).transpose().array() =
          (gram.row(r).transpose().array() / tau - st.shift).exp() * neg_coef;
      double* c = coef.row(r).data();
      c[i] = 0.0;
      for (const auto& e : weak_row) {
        if (cfg.use_weak_positive) {
          const double w = cfg.use_weak_weight ? e.weight : 1.0;
          c[e.col] = w * std::exp(gram(r, e.col) / tau - st.shift) * pos_coef;
        } else {
          c[e.col] = 0.0;
        }
      }
      if (cfg.use_positive) {
        for (std::size_t m = 0; m < num_views; ++m) {
          if (!in_view(m, i)) continue;
          const double cv = std::exp(cross(i, static_cast<Index>(m)) - st.shift) * pos_coef;
          grad_origin_hat.row(i) += cv * view_hat[m].row(i);
          grad_view_hat[m].row(i) += cv * origin_hat.row(i);
        }
      }
    }
    auto cb = coef.topRows(bs);
    grad_origin_hat.middleRows(b0, bs).noalias() += cb * origin_hat;
    grad_origin_hat.noalias() += cb.transpose() * origin_hat.middleRows(b0, bs);
  }

  // Chain through row normalization: dz = (dzhat - (dzhat . zhat) zhat) / |z|.
  auto unnormalize = [](const Matrix& grad_hat, const Matrix& hat, const Eigen::VectorXd& norms,
                        const std::vector<std::uint8_t>* mask) {
    Matrix out = Matrix::Zero(grad_hat.rows(), grad_hat.cols());
    for (Index i = 0; i < grad_hat.rows(); ++i) {
      if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
      const double dot = grad_hat.row(i).dot(hat.row(i));
      out.row(i) = (grad_hat.row(i) - dot * hat.row(i)) / norms[i];
    }
    return out;
  };

  result.grad_origin = unnormalize(grad_origin_hat, origin_hat, origin_norms, nullptr);
  result.grad_views.resize(num_views);
  for (std::size_t m = 0; m < num_views; ++m)
    result.grad_views[m] = unnormalize(grad_view_hat[m], view_hat[m], view_norms[m], view_mask(m));
  return result;
}

}  // namespace

ContrastiveLoss node_contrastive_loss(const Matrix& z, const std::vector<Matrix>& z_views,
                                      const WeakWeights& ww, const LossConfig& cfg,
                                      const ViewMasks* masks, bool with_grad) {
  return contrast(z, z_views, ww, cfg, cfg.tau_node, masks, with_grad);
}

ContrastiveLoss edge_contrastive_loss(const Matrix& y, const std::vector<Matrix>& y_views,
                                      const WeakWeights& ww_edge, const LossConfig& cfg,
                                      const ViewMasks* masks, bool with_grad) {
  return contrast(y, y_views, ww_edge, cfg, cfg.tau_edge, masks, with_grad);
}

}  // namespace hyfi

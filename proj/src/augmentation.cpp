#include "hyfi/augmentation.hpp"

#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

#include "hyfi/rng.hpp"

namespace hyfi {

bool is_noise_kind(AugmentationKind k) {
  return k == AugmentationKind::gaussian || k == AugmentationKind::uniform ||
         k == AugmentationKind::bernoulli;
}

bool is_drop_kind(AugmentationKind k) { return !is_noise_kind(k); }

std::string to_string(AugmentationKind k) {
  switch (k) {
    case AugmentationKind::gaussian: return "gaussian";
    case AugmentationKind::uniform: return "uniform";
    case AugmentationKind::bernoulli: return "bernoulli";
    case AugmentationKind::drop_incidence: return "drop-incidence";
    case AugmentationKind::drop_node: return "drop-node";
    case AugmentationKind::drop_hyperedge: return "drop-hyperedge";
  }
  return "?";
}

AugmentationKind augmentation_kind_from_string(const std::string& name) {
  if (name == "gaussian") return AugmentationKind::gaussian;
  if (name == "uniform") return AugmentationKind::uniform;
  if (name == "bernoulli") return AugmentationKind::bernoulli;
  if (name == "drop-incidence" || name == "drop_incidence") return AugmentationKind::drop_incidence;
  if (name == "drop-node" || name == "drop_node") return AugmentationKind::drop_node;
  if (name == "drop-hyperedge" || name == "drop_hyperedge") return AugmentationKind::drop_hyperedge;
  throw std::invalid_argument("config error: unknown augmentation kind '" + name + "'");
}

void AugmentationSpec::validate() const {
  if (sigma < 0) throw std::invalid_argument("config error: sigma must be >= 0");
  if (flip_prob < 0 || flip_prob > 1) throw std::invalid_argument("config error: flip_prob must be in [0,1]");
  if (drop_rate < 0 || drop_rate > 1) throw std::invalid_argument("config error: drop_rate must be in [0,1]");
  if (num_views < 1) throw std::invalid_argument("config error: num_views must be >= 1");
}

const FeatureMatrix& view_features(const NoiseView& view, const FeatureMatrix& origin) {
  return view.features ? *view.features : origin;
}

const Hypergraph& view_graph(const NoiseView& view, const Hypergraph& origin) {
  return view.hypergraph_override ? *view.hypergraph_override : origin;
}

NoiseView perturb_features(const FeatureMatrix& x, const AugmentationSpec& spec, int view_index) {
  if (!is_noise_kind(spec.kind))
    throw std::invalid_argument("perturb_features: drop kind " + to_string(spec.kind) +
                                " passed to the feature-noise path");
  spec.validate();

  if (x.values.size() > 0 && (x.values.minCoeff() < 0.0 || x.values.maxCoeff() > 1.0))
    std::cerr << "warning: feature entries outside [0,1]; the perturbation sign rule assumes "
                 "normalized features\n";

  auto engine = rng::make_engine(rng::derive(spec.seed, "perturb", static_cast<std::uint64_t>(view_index)));

  Matrix out(x.values.rows(), x.values.cols());
  const Index rows = x.values.rows(), cols = x.values.cols();
  if (spec.kind == AugmentationKind::bernoulli) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        double v = x.values(i, j);
        out(i, j) = unit(engine) < spec.flip_prob ? 1.0 - std::floor(v + 0.5) : v;
      }
    }
  } else {
    std::normal_distribution<double> normal(0.0, spec.sigma > 0.0 ? spec.sigma : 1.0);
    std::uniform_real_distribution<double> uniform(0.0, spec.sigma > 0.0 ? spec.sigma : 1.0);
    const bool gaussian = spec.kind == AugmentationKind::gaussian;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        double eps = spec.sigma == 0.0 ? 0.0 : (gaussian ? normal(engine) : uniform(engine));
        out(i, j) = perturbed_value(x.values(i, j), eps);
      }
    }
  }
  out = out.cwiseMax(0.0).cwiseMin(1.0);

  NoiseView view;
  view.features = FeatureMatrix{std::move(out)};
  view.view_index = view_index;
  return view;
}

NoiseView drop_augment(const Hypergraph& h, const AugmentationSpec& spec, int view_index) {
  if (!is_drop_kind(spec.kind))
    throw std::invalid_argument("drop_augment: noise kind " + to_string(spec.kind) +
                                " passed to the topology-drop path");
  spec.validate();

  auto engine = rng::make_engine(rng::derive(spec.seed, "drop", static_cast<std::uint64_t>(view_index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<int>> edges;
  edges.reserve(static_cast<std::size_t>(h.num_hyperedges()));

  if (spec.kind == AugmentationKind::drop_hyperedge) {
    for (Index e = 0; e < h.num_hyperedges(); ++e) {
      bool drop = unit(engine) < spec.drop_rate;
      edges.push_back(drop ? std::vector<int>{} : h.hyperedge_members(e));
    }
  } else if (spec.kind == AugmentationKind::drop_node) {
    std::vector<char> dropped(static_cast<std::size_t>(h.num_nodes()));
    for (Index v = 0; v < h.num_nodes(); ++v)
      dropped[static_cast<std::size_t>(v)] = unit(engine) < spec.drop_rate;
    for (Index e = 0; e < h.num_hyperedges(); ++e) {
      std::vector<int> members;
      for (int v : h.hyperedge_members(e))
        if (!dropped[static_cast<std::size_t>(v)]) members.push_back(v);
      edges.push_back(std::move(members));
    }
  } else {  // drop_incidence
    for (Index e = 0; e < h.num_hyperedges(); ++e) {
      std::vector<int> members;
      for (int v : h.hyperedge_members(e))
        if (!(unit(engine) < spec.drop_rate)) members.push_back(v);
      edges.push_back(std::move(members));
    }
  }

  NoiseView view;
  view.hypergraph_override = Hypergraph::from_hyperedges(h.num_nodes(), std::move(edges));
  view.view_index = view_index;
  return view;
}

NoiseView make_view(const Hypergraph& h, const FeatureMatrix& x, const AugmentationSpec& spec,
                    int view_index) {
  return is_noise_kind(spec.kind) ? perturb_features(x, spec, view_index)
                                  : drop_augment(h, spec, view_index);
}

}  // namespace hyfi

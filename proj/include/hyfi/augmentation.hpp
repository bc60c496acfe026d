#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "hyfi/hypergraph.hpp"

namespace hyfi {

enum class AugmentationKind {
  gaussian,
  uniform,
  bernoulli,
  drop_incidence,
  drop_node,
  drop_hyperedge,
};

bool is_noise_kind(AugmentationKind k);
bool is_drop_kind(AugmentationKind k);
std::string to_string(AugmentationKind k);
AugmentationKind augmentation_kind_from_string(const std::string& name);

struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::gaussian;
  double sigma = 0.2;       // noise scale for gaussian/uniform
  double flip_prob = 0.2;   // bernoulli
  double drop_rate = 0.2;   // drop kinds
  int num_views = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

// One augmented view. Noise kinds carry a perturbed copy of the features and
// reuse the origin hypergraph by identity (features holds a value,
// hypergraph_override is empty). Drop kinds carry an altered hypergraph with
// the same node/hyperedge cardinalities and leave features untouched
// (features empty means "same as origin").
struct NoiseView {
  std::optional<FeatureMatrix> features;
  std::optional<Hypergraph> hypergraph_override;
  int view_index = 0;
};

const FeatureMatrix& view_features(const NoiseView& view, const FeatureMatrix& origin);
const Hypergraph& view_graph(const NoiseView& view, const Hypergraph& origin);

// Sign rule for a single entry: values rounding to 0 move up by |eps|,
// values rounding to 1 move down, clamped to [0,1].
inline double perturbed_value(double x, double eps) {
  const double sign = std::floor(x + 0.5) >= 1.0 ? -1.0 : 1.0;
  const double v = x + sign * std::abs(eps);
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

// Topology-preserving perturbation. Entries that round to 0 move up and
// entries that round to 1 move down by |eps|; the result is clamped to [0,1].
// Deterministic given (spec.seed, view_index).
NoiseView perturb_features(const FeatureMatrix& x, const AugmentationSpec& spec, int view_index);

// Drop-style topology augmentation: removes memberships (incidence), a
// node's memberships, or whole hyperedges, keeping index cardinality so
// same-index pairing across views stays well-defined.
NoiseView drop_augment(const Hypergraph& h, const AugmentationSpec& spec, int view_index);

NoiseView make_view(const Hypergraph& h, const FeatureMatrix& x, const AugmentationSpec& spec,
                    int view_index);

}  // namespace hyfi

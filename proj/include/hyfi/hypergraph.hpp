#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hyfi {

using Real = double;
// Row-major so per-node/per-hyperedge rows are contiguous for the sparse
// aggregation kernels.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Dense |V| x d node-feature matrix.
struct FeatureMatrix {
  Matrix values;

  Index num_rows() const { return values.rows(); }
  Index feature_dim() const { return values.cols(); }
};

struct LabelVector {
  std::vector<int> labels;
  int num_classes = 0;
};

enum class OverlapLevel { node, edge };

// Symmetric co-membership counts: H*H^T at node level, H^T*H at edge level.
// The diagonal (an element's own degree) is stored separately from the
// off-diagonal entries, which are kept CSR-style so large graphs never
// materialize a dense matrix.
class OverlapMatrix {
 public:
  struct Entry {
    std::int32_t col;
    std::int32_t count;
  };

  Index size() const { return static_cast<Index>(diagonal_.size()); }
  std::int64_t diagonal(Index i) const { return diagonal_[static_cast<std::size_t>(i)]; }

  // Off-diagonal entries of row i, sorted by column id.
  std::span<const Entry> row(Index i) const {
    auto begin = offsets_[static_cast<std::size_t>(i)];
    auto end = offsets_[static_cast<std::size_t>(i) + 1];
    return {entries_.data() + begin, static_cast<std::size_t>(end - begin)};
  }

  // Random access; O(log row-length) for i != j.
  std::int64_t count(Index i, Index j) const;

  std::int64_t num_offdiagonal_entries() const { return static_cast<std::int64_t>(entries_.size()); }

  static OverlapMatrix build(const std::vector<std::vector<int>>& groups_of,
                             const std::vector<std::vector<int>>& members_of,
                             Index size);

  // Low-level constructor from raw CSR parts; no consistency checks.
  static OverlapMatrix from_raw(std::vector<std::int64_t> diagonal,
                                std::vector<std::int64_t> offsets, std::vector<Entry> entries) {
    OverlapMatrix om;
    om.diagonal_ = std::move(diagonal);
    om.offsets_ = std::move(offsets);
    om.entries_ = std::move(entries);
    return om;
  }

 private:
  std::vector<std::int64_t> diagonal_;
  std::vector<std::int64_t> offsets_;
  std::vector<Entry> entries_;
};

// Immutable hypergraph stored as mutually consistent per-hyperedge member
// lists and per-node membership lists, plus both degree vectors.
class Hypergraph {
 public:
  Hypergraph() = default;
  Hypergraph(const Hypergraph&) = delete;
  Hypergraph& operator=(const Hypergraph&) = delete;
  Hypergraph(Hypergraph&&) = default;
  Hypergraph& operator=(Hypergraph&&) = default;

  // Validates ids, rejects duplicate membership, sorts adjacency lists.
  // Empty hyperedges are allowed here (drop-style augmented views produce
  // them); the file loader rejects empty lines separately.
  static Hypergraph from_hyperedges(Index num_nodes, std::vector<std::vector<int>> hyperedges);

  Index num_nodes() const { return num_nodes_; }
  Index num_hyperedges() const { return static_cast<Index>(edge_members_.size()); }

  const std::vector<int>& hyperedge_members(Index e) const { return edge_members_[static_cast<std::size_t>(e)]; }
  const std::vector<int>& node_memberships(Index v) const { return node_edges_[static_cast<std::size_t>(v)]; }

  const std::vector<int>& node_degree() const { return node_degree_; }
  const std::vector<int>& hyperedge_degree() const { return edge_degree_; }

  std::int64_t num_incidences() const { return num_incidences_; }

  // Cached after first computation; safe under concurrent readers.
  const OverlapMatrix& overlap(OverlapLevel level) const;

 private:
  Index num_nodes_ = 0;
  std::vector<std::vector<int>> edge_members_;  // sorted node ids per hyperedge
  std::vector<std::vector<int>> node_edges_;    // sorted hyperedge ids per node
  std::vector<int> node_degree_;
  std::vector<int> edge_degree_;
  std::int64_t num_incidences_ = 0;

  struct OverlapCache {
    std::once_flag node_once, edge_once;
    std::unique_ptr<OverlapMatrix> node_level, edge_level;
  };
  std::unique_ptr<OverlapCache> cache_ = std::make_unique<OverlapCache>();
};

OverlapMatrix overlap_matrix(const Hypergraph& h, OverlapLevel level);

// Weak-positive candidate set of anchor i: all j != i with count(i,j) > 0.
std::vector<std::pair<int, std::int64_t>> shared_neighbors(const OverlapMatrix& om, Index i);

struct Dataset {
  Hypergraph graph;
  FeatureMatrix features;
  LabelVector labels;
};

// Canonical directory format: hyperedges.txt (one hyperedge per line,
// ascending space-separated 0-based node ids), features.csv (one node per
// line, comma-separated decimals), labels.txt (one integer per line).
Dataset load_dataset(const std::filesystem::path& dir);

void save_hyperedges(const Hypergraph& h, const std::filesystem::path& file);
void save_features(const FeatureMatrix& x, const std::filesystem::path& file);
void save_labels(const LabelVector& y, const std::filesystem::path& file);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

// FNV-1a over the three canonical files, for run manifests.
std::uint64_t dataset_fingerprint(const std::filesystem::path& dir);

}  // namespace hyfi

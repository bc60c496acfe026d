#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyfi/hypergraph.hpp"

namespace hyfi {

struct SplitSpec {
  double train_frac = 0.10;
  double valid_frac = 0.10;
  double test_frac = 0.80;
  int num_splits = 20;
  int num_inits = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<int> train;
  std::vector<int> valid;
  std::vector<int> test;
};

// Independent uniform partitions; train and valid take floor(frac*n) nodes
// each, test takes the remainder. Deterministic given spec.seed.
std::vector<Split> make_splits(Index n, const SplitSpec& spec);

struct EvalRun {
  int split;
  int init;
  double accuracy;
};

struct EvalReport {
  std::vector<EvalRun> runs;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample std over runs
  int skipped_splits = 0;     // splits whose train part missed a class
  std::string config_fingerprint;
};

// Standard linear evaluation: fit one affine layer with softmax
// cross-entropy on frozen embeddings, select the epoch by validation
// accuracy (earliest epoch wins ties), report test accuracy; aggregated over
// num_splits x num_inits runs.
EvalReport linear_evaluate(const Matrix& embeddings, const LabelVector& labels,
                           const SplitSpec& spec);

struct CommonalityPoint {
  int shared_count;    // c: number of common hyperedges
  double mean_cosine;  // mean cosine similarity of raw feature rows
  std::int64_t pair_count;
};

struct CommonalityCurve {
  std::vector<CommonalityPoint> points;
  std::int64_t zero_norm_rows = 0;  // feature rows excluded from pairing
};

// Mean raw-feature cosine similarity over all unordered node pairs sharing
// exactly c hyperedges, for every c present (capped at max_c; 0 = no cap).
CommonalityCurve commonality_curve(const Hypergraph& h, const FeatureMatrix& x, int max_c = 0);

}  // namespace hyfi

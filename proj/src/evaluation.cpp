#include "hyfi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hyfi/rng.hpp"

namespace hyfi {

void SplitSpec::validate() const {
  if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-12)
    throw std::invalid_argument("config error: split fractions must sum to 1");
  if (train_frac <= 0 || valid_frac <= 0 || test_frac <= 0)
    throw std::invalid_argument("config error: split fractions must be positive");
  if (num_splits < 1 || num_inits < 1)
    throw std::invalid_argument("config error: num_splits and num_inits must be >= 1");
}

std::vector<Split> make_splits(Index n, const SplitSpec& spec) {
  spec.validate();
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_frac * static_cast<double>(n)));
  const auto n_valid = static_cast<std::size_t>(std::floor(spec.valid_frac * static_cast<double>(n)));
  if (n < 10 || n_train == 0 || n_valid == 0 ||
      static_cast<std::size_t>(n) <= n_train + n_valid)
    throw std::invalid_argument("make_splits: node count " + std::to_string(n) +
                                " too small for nonempty parts");

  std::vector<Split> splits;
  splits.reserve(static_cast<std::size_t>(spec.num_splits));
  for (int s = 0; s < spec.num_splits; ++s) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto engine = rng::make_engine(rng::derive(spec.seed, "split", static_cast<std::uint64_t>(s)));
    std::shuffle(order.begin(), order.end(), engine);

    Split split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                       order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), order.end());
    splits.push_back(std::move(split));
  }
  return splits;
}

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = labels[static_cast<std::size_t>(rows[i])];
  return out;
}

double accuracy_of(const Matrix& logits, const std::vector<int>& labels) {
  Index correct = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best;
    logits.row(i).maxCoeff(&best);
    if (static_cast<int>(best) == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

// Full-batch softmax regression with decoupled weight decay, validation
// selected. Constants follow the declared evaluation protocol.
struct ProbeConfig {
  double lr = 1e-2;
  double wd = 1e-4;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int epochs = 500;
};

double run_probe(const Matrix& embed, const std::vector<int>& labels, const Split& split,
                 int num_classes, std::uint64_t seed) {
  const ProbeConfig pc;
  const Index d = embed.cols();
  const Index c = num_classes;

  Matrix x_train = gather_rows(embed, split.train);
  Matrix x_valid = gather_rows(embed, split.valid);
  Matrix x_test = gather_rows(embed, split.test);
  std::vector<int> y_train = gather_labels(labels, split.train);
  std::vector<int> y_valid = gather_labels(labels, split.valid);
  std::vector<int> y_test = gather_labels(labels, split.test);

  auto engine = rng::make_engine(seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(d + c));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(d, c);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < c; ++j) w(i, j) = dist(engine);
  Matrix b = Matrix::Zero(1, c);

  Matrix mw = Matrix::Zero(d, c), vw = Matrix::Zero(d, c);
  Matrix mb = Matrix::Zero(1, c), vb = Matrix::Zero(1, c);

  Matrix best_w = w, best_b = b;
  double best_valid = -1.0;
  const double inv_n = 1.0 / static_cast<double>(x_train.rows());

  for (int epoch = 1; epoch <= pc.epochs; ++epoch) {
    Matrix logits = x_train * w;
    logits.rowwise() += b.row(0);
    // softmax cross-entropy gradient: (softmax - onehot) / n
    Matrix prob = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
    prob.array().colwise() /= prob.rowwise().sum().array();
    for (Index i = 0; i < prob.rows(); ++i)
      prob(i, y_train[static_cast<std::size_t>(i)]) -= 1.0;
    prob *= inv_n;

    Matrix gw = x_train.transpose() * prob;
    Matrix gb = prob.colwise().sum();

    const double bc1 = 1.0 - std::pow(pc.beta1, epoch);
    const double bc2 = 1.0 - std::pow(pc.beta2, epoch);
    mw = pc.beta1 * mw + (1 - pc.beta1) * gw;
    vw = pc.beta2 * vw + (1 - pc.beta2) * gw.cwiseProduct(gw);
    mb = pc.beta1 * mb + (1 - pc.beta1) * gb;
    vb = pc.beta2 * vb + (1 - pc.beta2) * gb.cwiseProduct(gb);
    w -= pc.lr * ((mw / bc1).cwiseQuotient(((vw / bc2).cwiseSqrt().array() + pc.eps).matrix())) +
         pc.lr * pc.wd * w;
    b -= pc.lr * ((mb / bc1).cwiseQuotient(((vb / bc2).cwiseSqrt().array() + pc.eps).matrix()));

    Matrix valid_logits = x_valid * w;
    valid_logits.rowwise() += b.row(0);
    const double valid_acc = accuracy_of(valid_logits, y_valid);
    if (valid_acc > best_valid) {  // ties keep the earliest epoch
      best_valid = valid_acc;
      best_w = w;
      best_b = b;
    }
  }

  Matrix test_logits = x_test * best_w;
  test_logits.rowwise() += best_b.row(0);
  return accuracy_of(test_logits, y_test);
}

}  // namespace

EvalReport linear_evaluate(const Matrix& embeddings, const LabelVector& labels,
                           const SplitSpec& spec) {
  spec.validate();
  if (embeddings.rows() != static_cast<Index>(labels.labels.size()))
    throw std::invalid_argument("linear_evaluate: embedding rows != label count");
  if (labels.num_classes < 2)
    throw std::invalid_argument("linear_evaluate: need at least two classes");

  const std::vector<Split> splits = make_splits(embeddings.rows(), spec);

  EvalReport report;
  std::vector<char> split_ok(splits.size(), 1);
  for (std::size_t s = 0; s < splits.size(); ++s) {
    std::vector<char> seen(static_cast<std::size_t>(labels.num_classes), 0);
    for (int i : splits[s].train) seen[static_cast<std::size_t>(labels.labels[static_cast<std::size_t>(i)])] = 1;
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      split_ok[s] = 0;
      ++report.skipped_splits;
      std::cerr << "warning: split " << s << " is missing a class in its training part; skipped\n";
    }
  }

  struct Task {
    int split;
    int init;
  };
  std::vector<Task> tasks;
  for (int s = 0; s < spec.num_splits; ++s) {
    if (!split_ok[static_cast<std::size_t>(s)]) continue;
    for (int k = 0; k < spec.num_inits; ++k) tasks.push_back({s, k});
  }

  report.runs.resize(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto [s, k] = tasks[t];
    const std::uint64_t seed =
        rng::derive(rng::derive(spec.seed, "probe-init", static_cast<std::uint64_t>(s)), "init",
                    static_cast<std::uint64_t>(k));
    report.runs[t] = {s, k, run_probe(embeddings, labels.labels,
                                      splits[static_cast<std::size_t>(s)], labels.num_classes, seed)};
  }

  if (report.runs.empty())
    throw std::runtime_error("linear_evaluate: every split was skipped (class missing from train)");

  double sum = 0.0;
  for (const auto& r : report.runs) sum += r.accuracy;
  report.mean_accuracy = sum / static_cast<double>(report.runs.size());
  double ss = 0.0;
  for (const auto& r : report.runs) {
    const double d = r.accuracy - report.mean_accuracy;
    ss += d * d;
  }
  report.std_accuracy =
      report.runs.size() > 1 ? std::sqrt(ss / static_cast<double>(report.runs.size() - 1)) : 0.0;
  return report;
}

CommonalityCurve commonality_curve(const Hypergraph& h, const FeatureMatrix& x, int max_c) {
  if (x.values.rows() != h.num_nodes())
    throw std::invalid_argument("commonality_curve: feature rows != num_nodes");
  if (!x.values.allFinite())
    throw std::invalid_argument("commonality_curve: non-finite features");

  const Eigen::VectorXd norms = x.values.rowwise().norm();
  CommonalityCurve curve;
  for (Index i = 0; i < norms.size(); ++i)
    if (norms[i] == 0.0) ++curve.zero_norm_rows;

  const OverlapMatrix& om = h.overlap(OverlapLevel::node);
  std::map<int, std::pair<double, std::int64_t>> acc;  // c -> (sum cosine, count)
  for (Index i = 0; i < om.size(); ++i) {
    if (norms[i] == 0.0) continue;
    for (const auto& e : om.row(i)) {
      if (e.col <= i) continue;  // unordered pairs once
      if (norms[e.col] == 0.0) continue;
      const int c = static_cast<int>(e.count);
      if (max_c > 0 && c > max_c) continue;
      const double cosine = x.values.row(i).dot(x.values.row(e.col)) / (norms[i] * norms[e.col]);
      auto& slot = acc[c];
      slot.first += cosine;
      slot.second += 1;
    }
  }

  for (const auto& [c, slot] : acc)
    curve.points.push_back({c, slot.first / static_cast<double>(slot.second), slot.second});
  return curve;
}

}  // namespace hyfi

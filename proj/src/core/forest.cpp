#include "forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "error.hpp"
#include "rng.hpp"

namespace poetopics {

namespace {

constexpr double kTieEpsilon = 1e-12;

std::vector<double> class_counts(std::span<const int> y, std::span<const std::size_t> rows,
                                 int num_classes) {
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (std::size_t r : rows) counts[static_cast<std::size_t>(y[r])] += 1.0;
  return counts;
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

void ForestConfig::validate() const {
  if (n_trees < 1) fail(ErrorKind::Validation, "forest: n_trees must be >= 1");
  if (min_samples_split < 2) fail(ErrorKind::Validation, "forest: min_samples_split must be >= 2");
  if (max_depth && *max_depth < 1) fail(ErrorKind::Validation, "forest: max_depth must be >= 1");
}

std::string to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    case MaxFeatures::All: return "all";
  }
  return "?";
}

std::string to_string(Impurity i) { return i == Impurity::Gini ? "gini" : "entropy"; }

MaxFeatures parse_max_features(std::string_view text) {
  if (text == "sqrt") return MaxFeatures::Sqrt;
  if (text == "log2") return MaxFeatures::Log2;
  if (text == "all") return MaxFeatures::All;
  fail(ErrorKind::Validation, "max_features must be sqrt, log2 or all (got '" + std::string(text) + "')");
}

Impurity parse_impurity(std::string_view text) {
  if (text == "gini") return Impurity::Gini;
  if (text == "entropy") return Impurity::Entropy;
  fail(ErrorKind::Validation, "impurity must be gini or entropy (got '" + std::string(text) + "')");
}

std::string ForestConfig::describe() const {
  return "n_trees=" + std::to_string(n_trees) +
         " max_depth=" + (max_depth ? std::to_string(*max_depth) : std::string("none")) +
         " min_samples_split=" + std::to_string(min_samples_split) +
         " max_features=" + to_string(max_features) + " impurity=" + to_string(impurity) +
         " bootstrap=" + (bootstrap ? "true" : "false");
}

std::size_t ForestConfig::features_per_split(std::size_t p) const {
  if (p == 0) return 0;
  switch (max_features) {
    case MaxFeatures::Sqrt:
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));
    case MaxFeatures::Log2:
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::log2(static_cast<double>(p))));
    case MaxFeatures::All:
      return p;
  }
  return p;
}

double impurity(std::span<const double> counts, Impurity kind) {
  const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (n <= 0.0) return 0.0;
  double result = kind == Impurity::Gini ? 1.0 : 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / n;
    if (kind == Impurity::Gini) {
      result -= p * p;
    } else {
      result -= p * std::log2(p);
    }
  }
  return result;
}

double impurity_decrease(std::span<const double> parent, std::span<const double> left,
                         std::span<const double> right, Impurity kind) {
  const double n = std::accumulate(parent.begin(), parent.end(), 0.0);
  const double nl = std::accumulate(left.begin(), left.end(), 0.0);
  const double nr = std::accumulate(right.begin(), right.end(), 0.0);
  if (n <= 0.0) return 0.0;
  return impurity(parent, kind) - (nl / n) * impurity(left, kind) - (nr / n) * impurity(right, kind);
}

double impurity_of_labels(std::span<const int> labels, int num_classes, Impurity kind) {
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
  return impurity(counts, kind);
}

SplitChoice best_split(const Matrix& X, std::span<const int> y, int num_classes,
                       std::span<const std::size_t> rows, std::span<const std::size_t> features,
                       Impurity kind) {
  SplitChoice best;
  const std::vector<double> parent = class_counts(y, rows, num_classes);
  const double parent_impurity = impurity(parent, kind);
  const double n = static_cast<double>(rows.size());
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::vector<double> left(parent.size());
  std::vector<double> right(parent.size());
  for (std::size_t f : features) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });
    std::fill(left.begin(), left.end(), 0.0);
    right = parent;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const auto c = static_cast<std::size_t>(y[order[i]]);
      left[c] += 1.0;
      right[c] -= 1.0;
      const double a = X(order[i], f);
      const double b = X(order[i + 1], f);
      if (!(a < b)) continue;
      const double nl = static_cast<double>(i + 1);
      const double decrease = parent_impurity - (nl / n) * impurity(left, kind) -
                              ((n - nl) / n) * impurity(right, kind);
      if (!best.found() || decrease > best.decrease + kTieEpsilon) {
        double mid = a + (b - a) / 2.0;
        if (!(mid < b)) mid = a;
        best = {static_cast<int>(f), mid, decrease};
      }
    }
  }
  return best;
}

const std::vector<double>& DecisionTree::leaf_distribution(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes[i].distribution;
}

int DecisionTree::predict(std::span<const double> x) const {
  return argmax_lowest(leaf_distribution(x));
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const int> y, int num_classes, const ForestConfig& config,
              std::uint64_t seed)
      : X_(X), y_(y), num_classes_(num_classes), config_(config), rng_(seed) {
    tree_.num_classes = num_classes;
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::vector<double> counts = class_counts(y_, rows, num_classes_);
    {
      TreeNode& node = tree_.nodes.back();
      node.samples = rows.size();
      node.distribution = counts;
      for (auto& p : node.distribution) p /= static_cast<double>(rows.size());
    }
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (pure || static_cast<int>(rows.size()) < config_.min_samples_split ||
        (config_.max_depth && depth >= *config_.max_depth)) {
      return index;
    }

    const SplitChoice split = choose_split(rows);
    if (!split.found()) return index;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
      (X_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int left = grow(std::move(left_rows), depth + 1);
    const int right = grow(std::move(right_rows), depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    node.weighted_decrease = static_cast<double>(node.samples) * std::max(split.decrease, 0.0);
    return index;
  }

  // Draws max_features candidates; when none of them can split the node the
  // remaining features are tried one at a time in the drawn order.
  SplitChoice choose_split(std::span<const std::size_t> rows) {
    const std::size_t p = X_.cols();
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i + 1 < p; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(p - i));
      std::swap(perm[i], perm[j]);
    }
    const std::size_t m = config_.features_per_split(p);
    std::vector<std::size_t> candidates(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(candidates.begin(), candidates.end());
    SplitChoice split = best_split(X_, y_, num_classes_, rows, candidates, config_.impurity);
    for (std::size_t i = m; !split.found() && i < p; ++i) {
      const std::size_t one[] = {perm[i]};
      split = best_split(X_, y_, num_classes_, rows, one, config_.impurity);
    }
    return split;
  }

  const Matrix& X_;
  std::span<const int> y_;
  int num_classes_;
  const ForestConfig& config_;
  SplitMix64 rng_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree train_tree(const Matrix& X, std::span<const int> y, int num_classes,
                        const ForestConfig& config, std::uint64_t seed,
                        std::span<const std::size_t> rows) {
  config.validate();
  if (rows.empty()) fail(ErrorKind::Runtime, "cannot train a tree on zero rows");
  if (y.size() != X.rows()) fail(ErrorKind::Validation, "labels do not match feature rows");
  for (std::size_t r : rows) {
    if (r >= X.rows()) fail(ErrorKind::Validation, "tree row index out of range");
    if (y[r] < 0 || y[r] >= num_classes) fail(ErrorKind::Validation, "label out of range");
  }
  TreeBuilder builder(X, y, num_classes, config, seed);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t tree) {
  return mix_seed(forest_seed, {tree, 1});
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t forest_seed, std::size_t tree) {
  SplitMix64 rng(mix_seed(forest_seed, {tree, 0}));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
  std::sort(rows.begin(), rows.end());
  return rows;
}

int TrainedForest::predict(std::span<const double> x) const {
  std::vector<double> votes(class_names.size(), 0.0);
  for (const auto& t : trees) votes[static_cast<std::size_t>(t.predict(x))] += 1.0;
  return argmax_lowest(votes);
}

std::vector<int> TrainedForest::predict(const Matrix& X) const {
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict(X.row(r));
  return out;
}

std::vector<double> TrainedForest::feature_importances() const {
  std::vector<double> imp(feature_names.size(), 0.0);
  for (const auto& t : trees) {
    for (const auto& node : t.nodes) {
      if (!node.is_leaf()) imp[static_cast<std::size_t>(node.feature)] += node.weighted_decrease;
    }
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : imp) v /= total;
  }
  return imp;
}

TrainedForest train_forest(const Matrix& X, std::span<const int> y,
                           std::vector<std::string> feature_names,
                           std::vector<std::string> class_names, const ForestConfig& config,
                           unsigned threads) {
  config.validate();
  if (X.rows() != y.size()) fail(ErrorKind::Validation, "labels do not match feature rows");
  if (feature_names.size() != X.cols()) fail(ErrorKind::Validation, "feature names do not match columns");
  if (X.rows() == 0) fail(ErrorKind::Runtime, "cannot train a forest on zero rows");
  std::vector<int> present(y.begin(), y.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  if (present.size() < 2) fail(ErrorKind::Runtime, "forest needs at least two classes in the training labels");
  if (present.front() < 0 || static_cast<std::size_t>(present.back()) >= class_names.size()) {
    fail(ErrorKind::Validation, "label outside the class list");
  }

  TrainedForest forest;
  forest.config = config;
  forest.feature_names = std::move(feature_names);
  forest.class_names = std::move(class_names);
  forest.trees.resize(static_cast<std::size_t>(config.n_trees));
  const int num_classes = static_cast<int>(forest.class_names.size());

  std::vector<std::size_t> all_rows(X.rows());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  auto build = [&](std::size_t t) {
    const auto rows = config.bootstrap ? bootstrap_rows(X.rows(), config.seed, t) : all_rows;
    forest.trees[t] = train_tree(X, y, num_classes, config, tree_seed(config.seed, t), rows);
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(config.n_trees));
  if (threads <= 1) {
    for (std::size_t t = 0; t < forest.trees.size(); ++t) build(t);
    return forest;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t t = next++; t < forest.trees.size() && !failed; t = next++) {
          try {
            build(t);
          } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return forest;
}

}  // namespace poetopics

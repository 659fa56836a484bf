#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace poetopics {

enum class MaxFeatures { Sqrt, Log2, All };
enum class Impurity { Gini, Entropy };

struct ForestConfig {
  int n_trees = 100;
  std::optional<int> max_depth;  // unlimited when absent
  int min_samples_split = 2;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  Impurity impurity = Impurity::Gini;
  bool bootstrap = true;
  std::uint64_t seed = 1;

  void validate() const;
  std::string describe() const;
  std::size_t features_per_split(std::size_t num_features) const;
};

std::string to_string(MaxFeatures m);
std::string to_string(Impurity i);
MaxFeatures parse_max_features(std::string_view text);
Impurity parse_impurity(std::string_view text);

/// Impurity of a class histogram (counts per class).
double impurity(std::span<const double> class_counts, Impurity kind);
/// Parent impurity minus the size-weighted mean of the child impurities.
double impurity_decrease(std::span<const double> parent, std::span<const double> left,
                         std::span<const double> right, Impurity kind);
/// Convenience over label lists.
double impurity_of_labels(std::span<const int> labels, int num_classes, Impurity kind);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left iff x[feature] <= threshold
  int left = -1;
  int right = -1;
  std::vector<double> distribution;  // class frequencies at this node, sum 1
  std::size_t samples = 0;
  double weighted_decrease = 0.0;  // samples * impurity decrease, internal nodes

  bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int num_classes = 0;

  const std::vector<double>& leaf_distribution(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
  bool found() const noexcept { return feature >= 0; }
};

/// Exhaustive search over the given features at midpoints of sorted unique
/// values. Ties in decrease go to the earlier feature in `features` order,
/// then to the lower threshold. Decreases within 1e-12 count as ties.
SplitChoice best_split(const Matrix& X, std::span<const int> y, int num_classes,
                       std::span<const std::size_t> rows, std::span<const std::size_t> features,
                       Impurity kind);

/// CART on the listed rows (duplicates allowed, as from a bootstrap draw).
DecisionTree train_tree(const Matrix& X, std::span<const int> y, int num_classes,
                        const ForestConfig& config, std::uint64_t seed,
                        std::span<const std::size_t> rows);

struct TrainedForest {
  ForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::vector<DecisionTree> trees;

  /// Majority vote of per-tree argmax; ties go to the lowest class index.
  int predict(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& X) const;
  /// Total weighted impurity decrease per feature, normalized to sum 1.
  std::vector<double> feature_importances() const;
};

/// Per-tree substreams: both depend only on (forest seed, tree index).
std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t tree);
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t forest_seed, std::size_t tree);

/// Trees are trained in parallel on `threads` workers (0 = hardware
/// concurrency); the result does not depend on the thread count.
TrainedForest train_forest(const Matrix& X, std::span<const int> y,
                           std::vector<std::string> feature_names,
                           std::vector<std::string> class_names, const ForestConfig& config,
                           unsigned threads = 0);

}  // namespace poetopics

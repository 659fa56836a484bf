#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "error.hpp"
#include "forest.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace poetopics;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

std::vector<std::string> names(std::size_t n, const std::string& prefix = "f") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Two well separated blobs in 4 dimensions; feature 3 is pure noise.
void blobs(std::size_t n, std::uint64_t seed, Matrix& X, std::vector<int>& y) {
  SplitMix64 rng(seed);
  X = Matrix(n, 4);
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    for (std::size_t f = 0; f < 3; ++f) X(i, f) = (c ? 5.0 : -5.0) + (rng.uniform() * 2.0 - 1.0);
    X(i, 3) = rng.uniform() * 10.0;
    y.push_back(c);
  }
}

ForestConfig small_config(int trees = 25) {
  ForestConfig c;
  c.n_trees = trees;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("impurity examples") {
  const std::vector<double> pure{4, 0}, half{2, 2}, none{0, 0};
  CHECK(impurity(pure, Impurity::Gini) == 0.0);
  CHECK(impurity(half, Impurity::Gini) == 0.5);
  CHECK(impurity(half, Impurity::Entropy) == 1.0);
  CHECK(impurity(pure, Impurity::Entropy) == 0.0);
  const std::vector<double> l{2, 0}, r{0, 2};
  CHECK(impurity_decrease(half, l, r, Impurity::Gini) == 0.5);
  CHECK(impurity_decrease(half, l, r, Impurity::Entropy) == 1.0);
  const std::vector<int> labels{0, 1, 2, 2};
  CHECK(impurity_of_labels(labels, 3, Impurity::Gini) == doctest::Approx(1.0 - (0.0625 + 0.0625 + 0.25)));
}

TEST_CASE("config parsing and validation") {
  CHECK(parse_max_features("sqrt") == MaxFeatures::Sqrt);
  CHECK(parse_max_features("log2") == MaxFeatures::Log2);
  CHECK(parse_max_features("all") == MaxFeatures::All);
  CHECK(parse_impurity("entropy") == Impurity::Entropy);
  CHECK_THROWS_AS(parse_impurity("mse"), Error);
  ForestConfig c;
  CHECK(c.features_per_split(107) == 10);
  CHECK(c.features_per_split(1) == 1);
  c.max_features = MaxFeatures::All;
  CHECK(c.features_per_split(7) == 7);
  c.n_trees = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("best split equals brute force") {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = oracle::random_split_instance(rng);
    const auto rows = all_rows(inst.X.rows());
    const auto feats = all_rows(inst.X.cols());
    for (Impurity kind : {Impurity::Gini, Impurity::Entropy}) {
      const auto got = best_split(inst.X, inst.y, inst.classes, rows, feats, kind);
      const auto want = oracle::brute_force_split(inst.X, inst.y, inst.classes, kind);
      CHECK(got.feature == want.feature);
      if (want.feature >= 0) {
        CHECK(got.threshold == want.threshold);
        CHECK(got.decrease == doctest::Approx(want.decrease).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("six-point two-class split") {
  Matrix X(6, 2);
  const double a[6] = {1, 2, 3, 4, 5, 6}, b[6] = {6, 1, 5, 2, 4, 3};
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = a[i];
    X(i, 1) = b[i];
  }
  const std::vector<int> y{0, 0, 1, 0, 1, 1};
  const auto got = best_split(X, y, 2, all_rows(6), all_rows(2), Impurity::Gini);
  const auto want = oracle::brute_force_split(X, y, 2, Impurity::Gini);
  CHECK(got.feature == want.feature);
  CHECK(got.threshold == want.threshold);
}

TEST_CASE("one-dimensional perfect split") {
  Matrix X(6, 1);
  const double v[6] = {0.0, 0.25, 0.4, 0.6, 0.75, 1.0};
  for (int i = 0; i < 6; ++i) X(i, 0) = v[i];
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  ForestConfig c;
  c.max_features = MaxFeatures::All;
  const auto tree = train_tree(X, y, 2, c, 1, all_rows(6));
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.5));
  for (int i = 0; i < 6; ++i) CHECK(tree.predict(X.row(i)) == y[i]);
}

TEST_CASE("pure labels give a single leaf") {
  Matrix X(5, 2, 1.0);
  X(0, 0) = 3.0;
  const std::vector<int> y(5, 1);
  const auto tree = train_tree(X, y, 2, ForestConfig{}, 1, all_rows(5));
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].is_leaf());
  CHECK(tree.predict(X.row(0)) == 1);
}

TEST_CASE("depth and min split limits") {
  Matrix X;
  std::vector<int> y;
  blobs(40, 3, X, y);
  // Labels that need many splits.
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>((i / 3) % 2);
  ForestConfig c;
  c.max_depth = 1;
  auto t = train_tree(X, y, 2, c, 1, all_rows(40));
  CHECK(t.nodes.size() <= 3);
  c.max_depth.reset();
  c.min_samples_split = 100;
  t = train_tree(X, y, 2, c, 1, all_rows(40));
  CHECK(t.nodes.size() == 1);
}

TEST_CASE("one tree without bootstrap is train_tree") {
  Matrix X;
  std::vector<int> y;
  blobs(60, 4, X, y);
  auto c = small_config(1);
  c.bootstrap = false;
  const auto forest = train_forest(X, y, names(4), names(2, "c"), c, 1);
  const auto tree = train_tree(X, y, 2, c, tree_seed(c.seed, 0), all_rows(60));
  REQUIRE(forest.trees.size() == 1);
  REQUIRE(forest.trees[0].nodes.size() == tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    CHECK(forest.trees[0].nodes[i].feature == tree.nodes[i].feature);
    CHECK(forest.trees[0].nodes[i].threshold == tree.nodes[i].threshold);
    CHECK(forest.trees[0].nodes[i].distribution == tree.nodes[i].distribution);
  }
}

TEST_CASE("separable blobs are classified perfectly") {
  Matrix X, Xt;
  std::vector<int> y, yt;
  blobs(100, 10, X, y);
  blobs(60, 11, Xt, yt);
  const auto forest = train_forest(X, y, names(4), names(2, "c"), small_config());
  CHECK(forest.predict(Xt) == yt);
}

TEST_CASE("forest is deterministic across runs and thread counts") {
  Matrix X, Xt;
  std::vector<int> y, yt;
  blobs(80, 12, X, y);
  blobs(80, 13, Xt, yt);
  for (std::size_t i = 0; i < y.size(); i += 5) y[i] = 1 - y[i];  // some label noise
  const auto a = train_forest(X, y, names(4), names(2, "c"), small_config(), 1);
  const auto b = train_forest(X, y, names(4), names(2, "c"), small_config(), 4);
  CHECK(a.predict(Xt) == b.predict(Xt));
  CHECK(a.feature_importances() == b.feature_importances());
}

TEST_CASE("bootstrap rows depend only on seed and tree index") {
  CHECK(bootstrap_rows(50, 3, 7) == bootstrap_rows(50, 3, 7));
  CHECK(bootstrap_rows(50, 3, 7) != bootstrap_rows(50, 3, 8));
  CHECK(bootstrap_rows(50, 3, 7) != bootstrap_rows(50, 4, 7));
  const auto r = bootstrap_rows(50, 3, 7);
  CHECK(r.size() == 50);
  CHECK(std::is_sorted(r.begin(), r.end()));
  CHECK(r.back() < 50);
}

TEST_CASE("positive affine rescaling of a feature keeps predictions") {
  Matrix X, Xt;
  std::vector<int> y, yt;
  blobs(80, 20, X, y);
  blobs(50, 21, Xt, yt);
  for (std::size_t i = 0; i < y.size(); i += 4) y[i] = 1 - y[i];
  Matrix X2 = X, Xt2 = Xt;
  for (std::size_t i = 0; i < X2.rows(); ++i) X2(i, 1) = 3.0 * X2(i, 1) + 7.0;
  for (std::size_t i = 0; i < Xt2.rows(); ++i) Xt2(i, 1) = 3.0 * Xt2(i, 1) + 7.0;
  const auto a = train_forest(X, y, names(4), names(2, "c"), small_config());
  const auto b = train_forest(X2, y, names(4), names(2, "c"), small_config());
  CHECK(a.predict(Xt) == b.predict(Xt2));
  CHECK(a.predict(X) == b.predict(X2));
}

TEST_CASE("importances are normalized and zero for unused features") {
  Matrix X;
  std::vector<int> y;
  blobs(80, 30, X, y);
  Matrix X5(80, 5);
  for (std::size_t i = 0; i < 80; ++i) {
    for (std::size_t f = 0; f < 4; ++f) X5(i, f) = X(i, f);
    X5(i, 4) = 2.5;  // constant, can never split
  }
  const auto forest = train_forest(X5, y, names(5), names(2, "c"), small_config());
  const auto imp = forest.feature_importances();
  REQUIRE(imp.size() == 5);
  std::vector<bool> used(5, false);
  for (const auto& t : forest.trees) {
    for (const auto& n : t.nodes) {
      if (!n.is_leaf()) used[static_cast<std::size_t>(n.feature)] = true;
    }
  }
  double sum = 0.0;
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(imp[f] >= 0.0);
    if (!used[f]) CHECK(imp[f] == 0.0);
    sum += imp[f];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(imp[4] == 0.0);
}

TEST_CASE("training accuracy is at least the majority rate") {
  SplitMix64 rng(8);
  const std::size_t n = 90;
  Matrix X(n, 3);
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < 3; ++f) X(i, f) = rng.uniform();
    y.push_back(rng.uniform() < 0.6 ? 0 : static_cast<int>(1 + rng.below(2)));
  }
  const auto forest = train_forest(X, y, names(3), names(3, "c"), small_config());
  const auto pred = forest.predict(X);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += pred[i] == y[i] ? 1 : 0;
  const auto majority = static_cast<std::size_t>(std::count(y.begin(), y.end(), 0));
  CHECK(hits >= majority);
}

TEST_CASE("vote ties go to the lowest class") {
  TrainedForest f;
  f.class_names = {"a", "b"};
  f.feature_names = {"x"};
  for (int c : {1, 0}) {
    DecisionTree t;
    t.num_classes = 2;
    TreeNode leaf;
    leaf.distribution = {c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0};
    t.nodes.push_back(leaf);
    f.trees.push_back(t);
  }
  const std::vector<double> x{0.0};
  CHECK(f.predict(x) == 0);
}

TEST_CASE("single class is an error") {
  Matrix X(4, 1, 0.0);
  const std::vector<int> y(4, 0);
  CHECK_THROWS_AS(train_forest(X, y, names(1), names(2, "c"), small_config()), Error);
}

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace oracle {

using poetopics::Impurity;
using poetopics::Matrix;

SplitInstance random_split_instance(poetopics::SplitMix64& rng) {
  SplitInstance inst;
  const std::size_t rows = 2 + rng.below(7);
  const std::size_t cols = 1 + rng.below(3);
  inst.classes = 2 + static_cast<int>(rng.below(2));
  const std::uint64_t levels = 2 + rng.below(5);
  inst.X = Matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) inst.X(r, c) = static_cast<double>(rng.below(levels)) * 0.5;
    inst.y.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.classes))));
  }
  return inst;
}

namespace {

double node_impurity(const std::vector<int>& labels, int classes, Impurity kind) {
  double result = kind == Impurity::Gini ? 1.0 : 0.0;
  for (int c = 0; c < classes; ++c) {
    const double p = static_cast<double>(std::count(labels.begin(), labels.end(), c)) /
                     static_cast<double>(labels.size());
    if (kind == Impurity::Gini) {
      result -= p * p;
    } else if (p > 0.0) {
      result -= p * std::log2(p);
    }
  }
  return result;
}

}  // namespace

Split brute_force_split(const Matrix& X, const std::vector<int>& y, int classes, Impurity kind) {
  const double parent = node_impurity(y, classes, kind);
  const double n = static_cast<double>(y.size());
  std::vector<Split> candidates;
  for (std::size_t f = 0; f < X.cols(); ++f) {
    std::set<double> values;
    for (std::size_t r = 0; r < X.rows(); ++r) values.insert(X(r, f));
    for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
      const double t = (*it + *std::next(it)) / 2.0;
      std::vector<int> left, right;
      for (std::size_t r = 0; r < X.rows(); ++r) (X(r, f) <= t ? left : right).push_back(y[r]);
      const double d = parent - static_cast<double>(left.size()) / n * node_impurity(left, classes, kind) -
                       static_cast<double>(right.size()) / n * node_impurity(right, classes, kind);
      candidates.push_back({static_cast<int>(f), t, d});
    }
  }
  if (candidates.empty()) return {};
  double best = candidates.front().decrease;
  for (const auto& c : candidates) best = std::max(best, c.decrease);
  Split pick;
  for (const auto& c : candidates) {
    if (best - c.decrease > 1e-12) continue;
    if (pick.feature < 0 || c.feature < pick.feature ||
        (c.feature == pick.feature && c.threshold < pick.threshold)) {
      pick = c;
    }
  }
  return pick;
}

}  // namespace oracle

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "forest.hpp"
#include "matrix.hpp"
#include "stylometry.hpp"

namespace poetopics {

struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> column_names;
  Matrix values;
  std::vector<int> labels;
  std::vector<std::string> class_names;
};

/// Per-unit topic mixtures, looked up by unit id.
struct ThetaTable {
  std::vector<std::string> ids;
  Matrix theta;
};

struct FeatureSelection {
  bool style = false;
  bool lda = false;
};

std::string topic_column_name(std::size_t k);  // "Topic<k>"

/// Columns are the style features (in StyleVector order) followed by
/// Topic0..Topic{K-1}. Labels and class names are copied through.
FeatureMatrix assemble_features(std::span<const TextUnit> units, const ThetaTable* thetas,
                                FeatureSelection selection, std::vector<int> labels,
                                std::vector<std::string> class_names);

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// |train| = round(ratio * n), Fisher-Yates on the seeded stream.
TrainTestSplit split_train_test(std::size_t n, double ratio, std::uint64_t seed);
/// Whole groups go to one side; groups are shuffled and added to train until
/// it reaches round(ratio * n) rows.
TrainTestSplit split_train_test_grouped(std::span<const std::string> groups, double ratio,
                                        std::uint64_t seed);

FeatureMatrix select_rows(const FeatureMatrix& fm, std::span<const std::size_t> rows);

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t support = 0;
};

struct FeatureImportance {
  std::string name;
  double value = 0.0;
};

struct GridScore {
  ForestConfig config;
  double validation_accuracy = 0.0;
};

struct EvalReport {
  std::string task;         // "period" or "author"
  std::string unit;         // "stanza" or "poem"
  std::string features;     // "style", "lda" or "combined"
  double accuracy = 0.0;
  double majority_baseline = 0.0;  // accuracy of predicting the most frequent training class
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double split_ratio = 0.0;
  std::uint64_t split_seed = 0;
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<FeatureImportance> importances;      // column order
  std::optional<ForestConfig> best_config;
  std::vector<GridScore> grid;
  std::vector<std::string> notes;
};

/// Scores the forest on a held-out matrix whose columns must match training.
EvalReport evaluate(const TrainedForest& forest, const FeatureMatrix& test);

struct AuthorSelection {
  std::vector<std::size_t> kept;        // indices into the input, ascending
  std::vector<std::string> authors;     // label id -> author, by rank
  std::vector<int> labels;              // one per kept index
  std::optional<std::string> warning;
};

/// Keeps units whose author is among the n most frequent; ties at the
/// cutoff go to the lexicographically smaller name.
AuthorSelection filter_top_authors(std::span<const std::string> unit_authors, std::size_t n);

struct GridSearchResult {
  ForestConfig best;
  std::vector<GridScore> scores;  // grid order
};

/// Every config is trained on the same split of (X, y): train_ratio of the
/// rows fit, the rest validate. Ties go to the earliest config.
GridSearchResult grid_search(const FeatureMatrix& data, std::span<const ForestConfig> grid,
                             double train_ratio, std::uint64_t seed, unsigned threads = 0);

/// n_trees x max_depth x max_features x impurity with the given seed.
std::vector<ForestConfig> default_grid(std::uint64_t seed);

std::string report_json(const EvalReport& report);
std::string report_text(const EvalReport& report);
std::string confusion_csv(const EvalReport& report);
/// Ranked descending by importance, ties by column name.
std::string importances_csv(const EvalReport& report);

}  // namespace poetopics

#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace poetopics {

std::string topic_column_name(std::size_t k) { return "Topic" + std::to_string(k); }

FeatureMatrix assemble_features(std::span<const TextUnit> units, const ThetaTable* thetas,
                                FeatureSelection selection, std::vector<int> labels,
                                std::vector<std::string> class_names) {
  if (!selection.style && !selection.lda) {
    fail(ErrorKind::Validation, "select style features, topic features, or both");
  }
  if (selection.lda && !thetas) fail(ErrorKind::Validation, "topic features need a theta table");
  if (labels.size() != units.size()) fail(ErrorKind::Validation, "one label per unit required");

  FeatureMatrix fm;
  std::unordered_map<std::string, std::size_t> theta_row;
  std::size_t K = 0;
  if (selection.lda) {
    K = thetas->theta.cols();
    for (std::size_t i = 0; i < thetas->ids.size(); ++i) theta_row.emplace(thetas->ids[i], i);
  }
  if (selection.style) {
    for (auto name : StyleVector::names()) fm.column_names.emplace_back(name);
  }
  for (std::size_t k = 0; k < K; ++k) fm.column_names.push_back(topic_column_name(k));

  fm.values = Matrix(units.size(), fm.column_names.size());
  for (std::size_t r = 0; r < units.size(); ++r) {
    std::size_t c = 0;
    if (selection.style) {
      for (double v : style_features(units[r]).values()) fm.values(r, c++) = v;
    }
    if (selection.lda) {
      auto it = theta_row.find(units[r].id);
      if (it == theta_row.end()) {
        fail(ErrorKind::Runtime, "no topic distribution for unit '" + units[r].id + "'");
      }
      for (double v : thetas->theta.row(it->second)) fm.values(r, c++) = v;
    }
    fm.row_ids.push_back(units[r].id);
  }
  fm.labels = std::move(labels);
  fm.class_names = std::move(class_names);
  return fm;
}

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::size_t train_count(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorKind::Validation, "split ratio must be in (0, 1)");
  if (n < 2) fail(ErrorKind::Runtime, "need at least two rows to split");
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (k == 0 || k == n) {
    fail(ErrorKind::Runtime, "split of " + std::to_string(n) + " rows at ratio " +
                                 io::format_double(ratio) + " leaves one side empty");
  }
  return k;
}

}  // namespace

TrainTestSplit split_train_test(std::size_t n, double ratio, std::uint64_t seed) {
  const std::size_t k = train_count(n, ratio);
  const auto idx = shuffled(n, seed);
  TrainTestSplit split;
  split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

TrainTestSplit split_train_test_grouped(std::span<const std::string> groups, double ratio,
                                        std::uint64_t seed) {
  const std::size_t target = train_count(groups.size(), ratio);
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < groups.size(); ++i) members[groups[i]].push_back(i);
  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [_, rows] : members) order.push_back(&rows);
  const auto perm = shuffled(order.size(), seed);
  TrainTestSplit split;
  for (std::size_t g : perm) {
    auto& side = split.train.size() < target ? split.train : split.test;
    side.insert(side.end(), order[g]->begin(), order[g]->end());
  }
  if (split.train.empty() || split.test.empty()) {
    fail(ErrorKind::Runtime, "grouped split leaves one side empty");
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

FeatureMatrix select_rows(const FeatureMatrix& fm, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.column_names = fm.column_names;
  out.class_names = fm.class_names;
  out.values = Matrix(rows.size(), fm.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row_ids.push_back(fm.row_ids[rows[i]]);
    out.labels.push_back(fm.labels[rows[i]]);
    const auto src = fm.values.row(rows[i]);
    std::copy(src.begin(), src.end(), out.values.row(i).begin());
  }
  return out;
}

EvalReport evaluate(const TrainedForest& forest, const FeatureMatrix& test) {
  if (test.column_names != forest.feature_names) {
    fail(ErrorKind::Validation, "test columns do not match the columns the forest was trained on");
  }
  if (test.labels.empty()) fail(ErrorKind::Runtime, "empty test set");
  const std::size_t C = forest.class_names.size();
  EvalReport report;
  report.class_names = forest.class_names;
  report.test_size = test.labels.size();
  report.confusion.assign(C, std::vector<std::size_t>(C, 0));
  const auto predicted = forest.predict(test.values);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int truth = test.labels[i];
    if (truth < 0 || static_cast<std::size_t>(truth) >= C) {
      fail(ErrorKind::Validation, "test label outside the forest's classes");
    }
    ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted[i])];
    correct += truth == predicted[i] ? 1 : 0;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
  for (std::size_t c = 0; c < C; ++c) {
    std::size_t tp = report.confusion[c][c];
    std::size_t support = 0;
    std::size_t predicted_c = 0;
    for (std::size_t o = 0; o < C; ++o) {
      support += report.confusion[c][o];
      predicted_c += report.confusion[o][c];
    }
    ClassMetrics m;
    m.name = forest.class_names[c];
    m.support = support;
    m.precision = predicted_c ? static_cast<double>(tp) / static_cast<double>(predicted_c) : 0.0;
    m.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    report.per_class.push_back(m);
  }
  const auto imp = forest.feature_importances();
  for (std::size_t f = 0; f < imp.size(); ++f) {
    report.importances.push_back({forest.feature_names[f], imp[f]});
  }
  report.best_config = forest.config;
  return report;
}

AuthorSelection filter_top_authors(std::span<const std::string> unit_authors, std::size_t n) {
  if (n < 2) fail(ErrorKind::Validation, "author count must be >= 2");
  std::map<std::string, std::size_t> counts;
  for (const auto& a : unit_authors) ++counts[a];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  AuthorSelection sel;
  if (ranked.size() < n) {
    sel.warning = "only " + std::to_string(ranked.size()) + " authors available, fewer than " +
                  std::to_string(n) + "; keeping all";
  } else {
    ranked.resize(n);
  }
  std::map<std::string, int> label;
  for (const auto& [author, _] : ranked) {
    label.emplace(author, static_cast<int>(sel.authors.size()));
    sel.authors.push_back(author);
  }
  for (std::size_t i = 0; i < unit_authors.size(); ++i) {
    auto it = label.find(unit_authors[i]);
    if (it == label.end()) continue;
    sel.kept.push_back(i);
    sel.labels.push_back(it->second);
  }
  return sel;
}

GridSearchResult grid_search(const FeatureMatrix& data, std::span<const ForestConfig> grid,
                             double train_ratio, std::uint64_t seed, unsigned threads) {
  if (grid.empty()) fail(ErrorKind::Validation, "grid search needs at least one configuration");
  const auto split = split_train_test(data.labels.size(), train_ratio, seed);
  const FeatureMatrix fit = select_rows(data, split.train);
  const FeatureMatrix validation = select_rows(data, split.test);
  GridSearchResult result;
  double best = -1.0;
  for (const auto& config : grid) {
    const auto forest =
        train_forest(fit.values, fit.labels, fit.column_names, fit.class_names, config, threads);
    const double acc = evaluate(forest, validation).accuracy;
    result.scores.push_back({config, acc});
    if (acc > best) {
      best = acc;
      result.best = config;
    }
  }
  return result;
}

std::vector<ForestConfig> default_grid(std::uint64_t seed) {
  std::vector<ForestConfig> grid;
  for (int trees : {100, 300}) {
    for (std::optional<int> depth : {std::optional<int>{}, std::optional<int>{16}}) {
      ForestConfig c;
      c.n_trees = trees;
      c.max_depth = depth;
      c.max_features = MaxFeatures::Sqrt;
      c.impurity = Impurity::Gini;
      c.seed = seed;
      grid.push_back(c);
    }
  }
  return grid;
}

namespace {

nlohmann::ordered_json config_json(const ForestConfig& c) {
  nlohmann::ordered_json j;
  j["n_trees"] = c.n_trees;
  j["max_depth"] = c.max_depth ? nlohmann::ordered_json(*c.max_depth) : nlohmann::ordered_json(nullptr);
  j["min_samples_split"] = c.min_samples_split;
  j["max_features"] = to_string(c.max_features);
  j["impurity"] = to_string(c.impurity);
  j["bootstrap"] = c.bootstrap;
  j["seed"] = std::to_string(c.seed);
  return j;
}

std::vector<FeatureImportance> ranked_importances(const EvalReport& r) {
  auto ranked = r.importances;
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.value != b.value ? a.value > b.value : a.name < b.name;
  });
  return ranked;
}

}  // namespace

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["task"] = r.task;
  j["unit"] = r.unit;
  j["features"] = r.features;
  j["accuracy"] = r.accuracy;
  j["majority_baseline"] = r.majority_baseline;
  j["train_size"] = r.train_size;
  j["test_size"] = r.test_size;
  j["split"] = {{"ratio", r.split_ratio}, {"seed", std::to_string(r.split_seed)}};
  j["classes"] = r.class_names;
  auto& pc = j["per_class"] = nlohmann::ordered_json::array();
  for (const auto& m : r.per_class) {
    pc.push_back({{"class", m.name}, {"precision", m.precision}, {"recall", m.recall},
                  {"support", m.support}});
  }
  j["confusion"] = r.confusion;
  auto& imp = j["importances"] = nlohmann::ordered_json::array();
  for (const auto& f : ranked_importances(r)) imp.push_back({{"feature", f.name}, {"importance", f.value}});
  j["best_config"] = r.best_config ? config_json(*r.best_config) : nlohmann::ordered_json(nullptr);
  auto& grid = j["grid"] = nlohmann::ordered_json::array();
  for (const auto& g : r.grid) {
    grid.push_back({{"config", config_json(g.config)}, {"validation_accuracy", g.validation_accuracy}});
  }
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::string report_text(const EvalReport& r) {
  std::string s;
  s += "task: " + r.task + "  unit: " + r.unit + "  features: " + r.features + "\n";
  s += "train/test: " + std::to_string(r.train_size) + "/" + std::to_string(r.test_size) +
       "  (ratio " + io::format_double(r.split_ratio) + ", seed " + std::to_string(r.split_seed) + ")\n";
  s += "accuracy: " + io::format_fixed(r.accuracy, 4) +
       "  majority baseline: " + io::format_fixed(r.majority_baseline, 4) + "\n";
  if (r.best_config) s += "forest: " + r.best_config->describe() + "\n";
  s += "\nclass                          precision  recall  support\n";
  for (const auto& m : r.per_class) {
    std::string name = m.name.substr(0, 30);
    name.resize(31, ' ');
    s += name + io::format_fixed(m.precision, 4) + "     " + io::format_fixed(m.recall, 4) + "  " +
         std::to_string(m.support) + "\n";
  }
  s += "\nmost informative features:\n";
  const auto ranked = ranked_importances(r);
  for (std::size_t i = 0; i < ranked.size() && i < 15; ++i) {
    s += "  " + ranked[i].name + " (" + io::format_fixed(ranked[i].value, 3) + ")\n";
  }
  for (const auto& n : r.notes) s += "note: " + n + "\n";
  return s;
}

std::string confusion_csv(const EvalReport& r) {
  std::string s = "true\\predicted";
  for (const auto& c : r.class_names) s += "," + c;
  s += "\n";
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    s += r.class_names[i];
    for (auto v : r.confusion[i]) s += "," + std::to_string(v);
    s += "\n";
  }
  return s;
}

std::string importances_csv(const EvalReport& r) {
  std::string s = "rank,feature,importance\n";
  const auto ranked = ranked_importances(r);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    s += std::to_string(i + 1) + "," + ranked[i].name + "," + io::format_double(ranked[i].value) + "\n";
  }
  return s;
}

}  // namespace poetopics

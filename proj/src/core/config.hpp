#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "forest.hpp"
#include "lda.hpp"

namespace poetopics {

struct PipelineConfig {
  // paths
  std::filesystem::path corpus_root;
  std::filesystem::path manifest;
  std::filesystem::path stopwords_dir;
  std::filesystem::path output_dir;

  // corpus
  std::vector<std::string> languages{"de", "fr", "nl", "la"};
  double language_margin = 0.0;
  TimeSlotConfig trend_slots{1575, 25, 1925};
  TimeSlotConfig class_slots{1575, 50, 1925};

  // textproc
  std::uint32_t min_doc_freq = 5;
  double max_doc_ratio = 0.5;

  // lda
  LdaHyperparams lda;
  int infer_sweeps = 50;
  std::size_t top_words = 20;

  // classify
  std::string task = "period";     // period | author
  std::string unit = "stanza";     // stanza | poem
  std::string features = "combined";  // style | lda | combined
  double split_ratio = 0.7;
  double grid_train_ratio = 0.7;
  std::size_t top_authors = 180;
  bool grouped_split = false;
  unsigned threads = 0;
  std::vector<int> grid_n_trees{100, 300};
  std::vector<int> grid_max_depth{0, 16};  // 0 = unlimited
  std::vector<std::string> grid_max_features{"sqrt"};
  std::vector<std::string> grid_impurity{"gini"};
  int grid_min_samples_split = 2;
  bool grid_bootstrap = true;

  std::uint64_t seed = 1;

  /// Sets one dotted key (the TOML key path) from its text form. Lists are
  /// comma-separated. Throws a validation error for unknown keys or values.
  void set(std::string_view key, std::string_view value);
  /// Text form of a key, as accepted by set().
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  /// Applies a TOML file; relative paths resolve against the file's directory.
  void load_toml(const std::filesystem::path& path);

  std::vector<ForestConfig> grid() const;

  /// Checks everything a command needs before it writes anything.
  void validate_for(std::string_view command) const;

  // Output layout under output_dir.
  std::filesystem::path corpus_dir() const { return output_dir / "corpus"; }
  std::filesystem::path store_path() const { return corpus_dir() / "corpus.jsonl"; }
  std::filesystem::path model_dir() const { return output_dir / "model"; }
  std::filesystem::path trends_dir() const { return output_dir / "trends"; }
  std::filesystem::path classify_dir() const {
    return output_dir / "classify" / (task + "-" + unit + "-" + features);
  }
};

}  // namespace poetopics

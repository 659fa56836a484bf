#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace poetopics {

using Tokens = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

/// Splits on Unicode whitespace, strips leading and trailing punctuation,
/// lowercases. Internal hyphens and apostrophes survive; no stemming.
Tokens tokenize(std::string_view text);

Tokens remove_stopwords(std::span<const std::string> tokens, const StopwordSet& lexicon);

/// One wordform per line, UTF-8. Lines are trimmed and lowercased; blank
/// lines and lines starting with '#' are skipped.
StopwordSet load_stopwords(const std::filesystem::path& path);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Words must be unique. Document frequencies are optional (zero-filled).
  explicit Vocabulary(std::vector<std::string> words,
                      std::vector<std::uint32_t> doc_freq = {});

  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(std::size_t index) const { return words_.at(index); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::uint32_t doc_freq(std::size_t index) const { return doc_freq_.at(index); }

  /// Index of word, or -1 when absent.
  std::int64_t find(std::string_view word) const;

  /// FNV-1a 64 over the words in index order, '\n'-separated.
  std::uint64_t hash() const noexcept;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint32_t> doc_freq_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Keeps words with min_doc_freq <= df <= max_doc_ratio * D. Indices are
/// assigned by descending df, ties lexicographic. Throws when nothing survives.
Vocabulary build_vocabulary(std::span<const Tokens> documents, std::uint32_t min_doc_freq,
                            double max_doc_ratio);

struct BowEntry {
  std::uint32_t word;
  std::uint32_t count;
  bool operator==(const BowEntry&) const = default;
};

struct BowDocument {
  std::string doc_id;
  std::vector<BowEntry> entries;  // strictly increasing word index, count >= 1
  std::uint64_t total = 0;        // sum of counts

  bool empty() const noexcept { return total == 0; }
  bool operator==(const BowDocument&) const = default;
};

/// Out-of-vocabulary tokens are dropped.
BowDocument to_bow(std::span<const std::string> tokens, const Vocabulary& vocab,
                   std::string doc_id = {});

// `doc_id<TAB>idx:count idx:count ...`, one document per line.
void write_bow_dump(const std::filesystem::path& path, std::span<const BowDocument> docs);
std::vector<BowDocument> read_bow_dump(const std::filesystem::path& path);

}  // namespace poetopics

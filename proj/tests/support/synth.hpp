#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lda.hpp"
#include "matrix.hpp"
#include "textproc.hpp"

namespace synth {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "pt");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path source_dir();
std::filesystem::path fixture(const std::string& rel);
std::filesystem::path stopwords_dir();

/// Distinct pronounceable lowercase pseudo-words, deterministic in index.
std::string pseudo_word(std::size_t index);

/// Documents with lengths uniform in [min_len, max_len] and words uniform in [0, V).
std::vector<poetopics::BowDocument> random_corpus(std::size_t docs, std::size_t vocab_size,
                                                  std::size_t min_len, std::size_t max_len,
                                                  std::uint64_t seed);

struct Planted {
  poetopics::Vocabulary vocab;
  std::vector<poetopics::BowDocument> bows;
  std::vector<int> doc_topic;  // generating topic per document
  poetopics::Matrix phi;       // topics x vocab, generating distributions
};

/// Two topics over disjoint halves of the vocabulary; every document is drawn
/// from exactly one of them. Word weights inside a half decay as 1/(j+1) so the
/// generating distributions are not flat.
Planted planted_corpus(std::size_t docs_per_topic, std::size_t words_per_topic,
                       std::size_t doc_len, std::uint64_t seed);

double total_variation(std::span<const double> a, std::span<const double> b);

/// Greedy matching on TV distance: repeatedly pair the closest remaining
/// (learned, true) topics. Returns the distance per true topic.
std::vector<double> matched_tv(const poetopics::Matrix& learned, const poetopics::Matrix& truth);

struct SlotCorpusSpec {
  int slots = 7;
  int width = 50;
  int origin = 1575;
  int end = 1925;
  int poems_per_slot = 20;
  int stanzas = 3;
  int lines = 4;
  int words_per_line = 6;
  int topic_words = 30;
  double own_topic = 0.8;      // share of content words from the slot topic
  double function_words = 0.25;
  std::uint64_t seed = 7;
};

/// Writes `manifest.tsv` and `poems/<id>.txt` under dir. Slot s draws its
/// content words from its own topic with probability own_topic and from a
/// shared topic otherwise. Authors cycle through four names per slot.
std::filesystem::path write_slot_corpus(const std::filesystem::path& dir, const SlotCorpusSpec& spec);

/// Map of relative path -> file bytes for every regular file under dir.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir);

}  // namespace synth

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textproc.hpp"

namespace poetopics {

struct PoemRecord {
  std::string id;
  std::string author;
  int year = 0;
  std::string title;
  std::vector<std::string> lines;  // may contain blank stanza separators
  std::string source_path;

  bool operator==(const PoemRecord&) const = default;
};

struct StanzaRecord {
  std::string poem_id;
  int stanza_index = 0;
  std::vector<std::string> lines;
  std::string author;
  int year = 0;

  std::string id() const { return poem_id + "#" + std::to_string(stanza_index); }
};

/// A classification or trend unit: either a whole poem or one stanza.
struct TextUnit {
  std::string id;
  std::string poem_id;
  std::string author;
  int year = 0;
  std::vector<std::string> lines;
};

std::vector<TextUnit> poem_units(std::span<const PoemRecord> poems);
std::vector<TextUnit> stanza_units(std::span<const PoemRecord> poems);

/// Bins are [origin + s*width, origin + (s+1)*width). The final bin is
/// closed at end_year, so a year equal to end_year lands in the last slot.
struct TimeSlotConfig {
  int origin_year = 1575;
  int slot_width_years = 25;
  int end_year = 1925;

  void validate() const;
  int slot_count() const;
  int slot_start(int slot) const { return origin_year + slot * slot_width_years; }
  /// Inclusive last year of a slot.
  int slot_end(int slot) const;
};

int assign_time_slot(int year, const TimeSlotConfig& config);

struct Rejection {
  std::string id;
  std::string reason;
};

struct IngestResult {
  std::vector<PoemRecord> records;  // sorted by (year, id)
  std::vector<Rejection> rejections;
};

/// Manifest: TSV with header `id author year title path`; paths are relative
/// to root. Row problems become rejections; a malformed header throws.
IngestResult ingest_corpus(const std::filesystem::path& root,
                           const std::filesystem::path& manifest,
                           const TimeSlotConfig& span = {});

std::vector<StanzaRecord> segment_stanzas(const PoemRecord& poem);

struct LanguageFilterConfig {
  std::map<std::string, StopwordSet> lexicons;  // language code -> lexicon
  std::string primary = "de";
  double german_margin = 0.0;

  void validate() const;
};

/// Loads `stopwords.<lang>.txt` for each requested language from dir.
LanguageFilterConfig load_language_filter(const std::filesystem::path& dir,
                                          std::span<const std::string> languages,
                                          double german_margin = 0.0);

struct LanguageDecision {
  bool keep = true;
  std::string dropped_as;                    // set when keep is false
  std::map<std::string, double> fractions;   // hits / token count
};

LanguageDecision detect_language(std::span<const std::string> tokens,
                                 const LanguageFilterConfig& config);

struct CorpusStats {
  std::size_t documents = 0;
  std::uint64_t tokens = 0;
  std::size_t authors = 0;
  double poems_per_author_mean = 0.0;
  double poems_per_author_median = 0.0;
  TimeSlotConfig slots;
  std::vector<std::size_t> histogram;  // one bucket per slot
};

CorpusStats corpus_stats(std::span<const PoemRecord> corpus, const TimeSlotConfig& config);

// Normalized corpus store, one JSON object per line:
// {"id","author","year","title","source_path","lines":[...]}
void write_corpus_store(const std::filesystem::path& path, std::span<const PoemRecord> corpus);
std::vector<PoemRecord> read_corpus_store(const std::filesystem::path& path);

void write_rejections(const std::filesystem::path& path, std::span<const Rejection> rejections);

}  // namespace poetopics

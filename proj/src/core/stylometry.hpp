#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"

namespace poetopics {

struct SyllableAnalysis {
  std::string word;
  int syllable_count = 0;
  int closed_count = 0;
  int open_count = 0;
  std::vector<std::string> syllables;
};

// Rule-based German syllabification:
//  * nuclei are vowel letters (a e i o u ä ö ü y); the pairs ei ai eu äu au ie
//    ey ay aa ee oo form one nucleus, and u after q is a consonant;
//  * between two nuclei the boundary sits before the last consonant unit
//    (sch, ch, ck, ph, th count as one unit), or directly between the nuclei
//    when no consonant intervenes;
//  * a syllable is open iff it ends in a vowel.
// Tokens without a vowel get zero syllables.
SyllableAnalysis syllabify(std::string_view word);

struct StyleVector {
  double mean_line_length_tokens = 0.0;
  double length_tokens = 0.0;
  double length_syllables = 0.0;
  double length_lines = 0.0;
  double mean_cadence = 0.0;
  double soundscape = 0.0;  // closed / (closed + open)
  double mean_first_word_syllables = 0.0;

  static constexpr std::size_t kSize = 7;
  static const std::array<std::string_view, kSize>& names();
  std::array<double, kSize> values() const;

  /// closed:open ratio, absent when there are no open syllables.
  std::optional<double> soundscape_ratio() const;
};

/// Uses every token, stopwords included. Lines without tokens are skipped.
StyleVector style_features(std::span<const std::string> lines);
inline StyleVector style_features(const TextUnit& unit) { return style_features(unit.lines); }

/// `unit_id<TAB>slot<TAB>author<TAB>` followed by the seven features.
void write_feature_dump(const std::filesystem::path& path, std::span<const TextUnit> units,
                        std::span<const StyleVector> features, std::span<const int> slots);

}  // namespace poetopics

#include "stylometry.hpp"

#include "error.hpp"
#include "io.hpp"
#include "textproc.hpp"
#include "utf8.hpp"

namespace poetopics {

namespace {

bool is_vowel(char32_t c) {
  switch (c) {
    case U'a': case U'e': case U'i': case U'o': case U'u': case U'y':
    case U'ä': case U'ö': case U'ü':
      return true;
    default:
      return false;
  }
}

bool single_nucleus_pair(char32_t a, char32_t b) {
  switch (a) {
    case U'e': return b == U'i' || b == U'u' || b == U'y' || b == U'e';
    case U'a': return b == U'i' || b == U'u' || b == U'y' || b == U'a';
    case U'ä': return b == U'u';
    case U'i': return b == U'e';
    case U'o': return b == U'o';
    default: return false;
  }
}

struct Span {
  std::size_t begin;
  std::size_t end;
};

// Length of the consonant unit starting at i (1 when no multigraph matches).
std::size_t consonant_unit(const std::u32string& w, std::size_t i, std::size_t limit) {
  auto at = [&](std::size_t k) { return k < limit ? w[k] : U'\0'; };
  if (at(i) == U's' && at(i + 1) == U'c' && at(i + 2) == U'h') return 3;
  if ((at(i) == U'c' && (at(i + 1) == U'h' || at(i + 1) == U'k')) ||
      ((at(i) == U'p' || at(i) == U't') && at(i + 1) == U'h')) {
    return 2;
  }
  return 1;
}

}  // namespace

SyllableAnalysis syllabify(std::string_view word) {
  SyllableAnalysis result;
  result.word = std::string(word);
  const std::u32string w = utf8::decode(utf8::to_lower(word));

  std::vector<bool> vowel(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    vowel[i] = is_vowel(w[i]) && !(w[i] == U'u' && i > 0 && w[i - 1] == U'q');
  }
  std::vector<Span> nuclei;
  for (std::size_t i = 0; i < w.size();) {
    if (!vowel[i]) {
      ++i;
      continue;
    }
    if (i + 1 < w.size() && vowel[i + 1] && single_nucleus_pair(w[i], w[i + 1])) {
      nuclei.push_back({i, i + 2});
      i += 2;
    } else {
      nuclei.push_back({i, i + 1});
      i += 1;
    }
  }
  if (nuclei.empty()) return result;

  // Syllable start positions: 0, then one boundary per following nucleus.
  std::vector<std::size_t> starts{0};
  for (std::size_t n = 1; n < nuclei.size(); ++n) {
    const std::size_t gap_begin = nuclei[n - 1].end;
    const std::size_t gap_end = nuclei[n].begin;
    std::size_t boundary = gap_end;
    std::size_t pos = gap_begin;
    while (pos < gap_end) {
      const std::size_t len = consonant_unit(w, pos, gap_end);
      boundary = pos;
      pos += len;
    }
    starts.push_back(boundary);
  }
  starts.push_back(w.size());

  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    const std::u32string piece = w.substr(starts[s], starts[s + 1] - starts[s]);
    result.syllables.push_back(utf8::encode(piece));
    if (is_vowel(piece.back()) && !(piece.size() >= 2 && piece.back() == U'u' &&
                                    piece[piece.size() - 2] == U'q')) {
      ++result.open_count;
    } else {
      ++result.closed_count;
    }
  }
  result.syllable_count = static_cast<int>(nuclei.size());
  return result;
}

const std::array<std::string_view, StyleVector::kSize>& StyleVector::names() {
  static constexpr std::array<std::string_view, kSize> kNames{
      "mean_line_length_tokens", "length_tokens", "length_syllables", "length_lines",
      "mean_cadence",            "soundscape",    "mean_first_word_syllables"};
  return kNames;
}

std::array<double, StyleVector::kSize> StyleVector::values() const {
  return {mean_line_length_tokens, length_tokens, length_syllables,         length_lines,
          mean_cadence,            soundscape,    mean_first_word_syllables};
}

std::optional<double> StyleVector::soundscape_ratio() const {
  if (soundscape >= 1.0) return std::nullopt;
  return soundscape / (1.0 - soundscape);
}

StyleVector style_features(std::span<const std::string> lines) {
  StyleVector v;
  long closed = 0;
  long open = 0;
  double cadence_sum = 0.0;
  double first_sum = 0.0;
  for (const auto& line : lines) {
    const Tokens tokens = tokenize(line);
    if (tokens.empty()) continue;
    v.length_lines += 1;
    v.length_tokens += static_cast<double>(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const SyllableAnalysis a = syllabify(tokens[i]);
      v.length_syllables += a.syllable_count;
      closed += a.closed_count;
      open += a.open_count;
      if (i == 0) first_sum += a.syllable_count;
      if (i + 1 == tokens.size()) cadence_sum += a.syllable_count;
    }
  }
  if (v.length_lines == 0) fail(ErrorKind::Runtime, "style features need at least one token");
  v.mean_line_length_tokens = v.length_tokens / v.length_lines;
  v.mean_cadence = cadence_sum / v.length_lines;
  v.mean_first_word_syllables = first_sum / v.length_lines;
  v.soundscape = closed + open > 0 ? static_cast<double>(closed) / static_cast<double>(closed + open)
                                   : 0.0;
  return v;
}

void write_feature_dump(const std::filesystem::path& path, std::span<const TextUnit> units,
                        std::span<const StyleVector> features, std::span<const int> slots) {
  if (units.size() != features.size() || units.size() != slots.size()) {
    fail(ErrorKind::Validation, "feature dump: row count mismatch");
  }
  std::string out = "unit_id\tslot\tauthor";
  for (auto name : StyleVector::names()) {
    out += '\t';
    out += name;
  }
  out += '\n';
  for (std::size_t i = 0; i < units.size(); ++i) {
    out += units[i].id + "\t" + std::to_string(slots[i]) + "\t" + units[i].author;
    for (double x : features[i].values()) {
      out += '\t';
      out += io::format_double(x);
    }
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace poetopics

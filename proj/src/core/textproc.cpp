#include "textproc.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "error.hpp"
#include "io.hpp"
#include "utf8.hpp"

namespace poetopics {

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  const std::u32string cps = utf8::decode(text);
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    while (i < n && utf8::is_space(cps[i])) ++i;
    std::size_t begin = i;
    while (i < n && !utf8::is_space(cps[i])) ++i;
    std::size_t end = i;
    while (begin < end && !utf8::is_word_char(cps[begin])) ++begin;
    while (end > begin && !utf8::is_word_char(cps[end - 1])) --end;
    if (begin == end) continue;
    std::string token;
    token.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) utf8::append(token, utf8::to_lower(cps[k]));
    tokens.push_back(std::move(token));
  }
  return tokens;
}

Tokens remove_stopwords(std::span<const std::string> tokens, const StopwordSet& lexicon) {
  Tokens kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!lexicon.contains(t)) kept.push_back(t);
  }
  return kept;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  StopwordSet set;
  for (const auto& raw : io::split_lines(io::read_file(path))) {
    const std::string_view line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    set.insert(utf8::to_lower(line));
  }
  if (set.empty()) fail(ErrorKind::Format, "stopword list is empty: " + path.string());
  return set;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint32_t> doc_freq)
    : words_(std::move(words)), doc_freq_(std::move(doc_freq)) {
  if (doc_freq_.empty()) doc_freq_.assign(words_.size(), 0);
  if (doc_freq_.size() != words_.size()) {
    fail(ErrorKind::Validation, "vocabulary: document frequency count mismatch");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<std::uint32_t>(i)).second) {
      fail(ErrorKind::Format, "vocabulary: duplicate word '" + words_[i] + "'");
    }
  }
}

std::int64_t Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::uint64_t Vocabulary::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : words_) {
    h = io::fnv1a64(w, h);
    h = io::fnv1a64("\n", h);
  }
  return h;
}

Vocabulary build_vocabulary(std::span<const Tokens> documents, std::uint32_t min_doc_freq,
                            double max_doc_ratio) {
  if (min_doc_freq < 1) fail(ErrorKind::Validation, "min_doc_freq must be >= 1");
  if (!(max_doc_ratio > 0.0 && max_doc_ratio <= 1.0)) {
    fail(ErrorKind::Validation, "max_doc_ratio must be in (0, 1]");
  }
  // Ordered map: the reduction result does not depend on hash iteration order.
  std::map<std::string, std::uint32_t> df;
  for (const auto& doc : documents) {
    Tokens unique(doc.begin(), doc.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& w : unique) ++df[std::move(w)];
  }
  const double max_df = max_doc_ratio * static_cast<double>(documents.size());
  std::vector<std::pair<std::string, std::uint32_t>> kept;
  for (auto& [word, count] : df) {
    if (count >= min_doc_freq && static_cast<double>(count) <= max_df) {
      kept.emplace_back(word, count);
    }
  }
  if (kept.empty()) {
    fail(ErrorKind::Runtime, "vocabulary is empty after document-frequency pruning");
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  std::vector<std::uint32_t> freqs;
  words.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [w, c] : kept) {
    words.push_back(std::move(w));
    freqs.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(freqs));
}

BowDocument to_bow(std::span<const std::string> tokens, const Vocabulary& vocab,
                   std::string doc_id) {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto idx = vocab.find(t);
    if (idx >= 0) ids.push_back(static_cast<std::uint32_t>(idx));
  }
  std::sort(ids.begin(), ids.end());
  BowDocument bow;
  bow.doc_id = std::move(doc_id);
  for (std::uint32_t id : ids) {
    if (!bow.entries.empty() && bow.entries.back().word == id) {
      ++bow.entries.back().count;
    } else {
      bow.entries.push_back({id, 1});
    }
  }
  bow.total = ids.size();
  return bow;
}

void write_bow_dump(const std::filesystem::path& path, std::span<const BowDocument> docs) {
  std::string out;
  for (const auto& d : docs) {
    out += d.doc_id;
    out += '\t';
    for (std::size_t i = 0; i < d.entries.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(d.entries[i].word);
      out += ':';
      out += std::to_string(d.entries[i].count);
    }
    out += '\n';
  }
  io::write_file(path, out);
}

std::vector<BowDocument> read_bow_dump(const std::filesystem::path& path) {
  std::vector<BowDocument> docs;
  std::size_t line_no = 0;
  for (const auto& line : io::split_lines(io::read_file(path))) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": missing tab");
    }
    BowDocument d;
    d.doc_id = line.substr(0, tab);
    std::istringstream pairs(line.substr(tab + 1));
    std::string item;
    while (pairs >> item) {
      const auto colon = item.find(':');
      std::uint64_t idx = 0;
      std::uint64_t count = 0;
      try {
        if (colon == std::string::npos) throw std::invalid_argument("no colon");
        idx = std::stoull(item.substr(0, colon));
        count = std::stoull(item.substr(colon + 1));
      } catch (const std::exception&) {
        fail(ErrorKind::Format,
             path.string() + ":" + std::to_string(line_no) + ": bad pair '" + item + "'");
      }
      if (count == 0 || (!d.entries.empty() && idx <= d.entries.back().word)) {
        fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) +
                                    ": indices must increase and counts be positive");
      }
      d.entries.push_back({static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(count)});
      d.total += count;
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace poetopics

#include "corpus.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "io.hpp"

namespace poetopics {

namespace {

bool is_blank(std::string_view line) { return io::trim(line).empty(); }

std::optional<int> parse_year(std::string_view text) {
  text = io::trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

std::vector<std::string> normalize_lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string> lines = io::split_lines(text);
  for (auto& l : lines) {
    if (is_blank(l)) l.clear();
  }
  auto first = std::find_if(lines.begin(), lines.end(), [](const auto& l) { return !l.empty(); });
  lines.erase(lines.begin(), first);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

void TimeSlotConfig::validate() const {
  if (slot_width_years <= 0) fail(ErrorKind::Validation, "slot width must be positive");
  if (end_year <= origin_year) {
    fail(ErrorKind::Validation, "end year must be greater than origin year");
  }
}

int TimeSlotConfig::slot_count() const {
  const int span = end_year - origin_year;
  return (span + slot_width_years - 1) / slot_width_years;
}

int TimeSlotConfig::slot_end(int slot) const {
  if (slot == slot_count() - 1) return end_year;
  return slot_start(slot + 1) - 1;
}

int assign_time_slot(int year, const TimeSlotConfig& config) {
  config.validate();
  if (year < config.origin_year || year > config.end_year) {
    fail(ErrorKind::Runtime, "year " + std::to_string(year) + " outside span " +
                                 std::to_string(config.origin_year) + "-" +
                                 std::to_string(config.end_year));
  }
  const int slot = (year - config.origin_year) / config.slot_width_years;
  return std::min(slot, config.slot_count() - 1);
}

std::vector<TextUnit> poem_units(std::span<const PoemRecord> poems) {
  std::vector<TextUnit> units;
  units.reserve(poems.size());
  for (const auto& p : poems) {
    std::vector<std::string> lines;
    for (const auto& l : p.lines) {
      if (!l.empty()) lines.push_back(l);
    }
    units.push_back({p.id, p.id, p.author, p.year, std::move(lines)});
  }
  return units;
}

std::vector<TextUnit> stanza_units(std::span<const PoemRecord> poems) {
  std::vector<TextUnit> units;
  for (const auto& p : poems) {
    for (auto& s : segment_stanzas(p)) {
      units.push_back({s.id(), s.poem_id, s.author, s.year, std::move(s.lines)});
    }
  }
  return units;
}

IngestResult ingest_corpus(const std::filesystem::path& root, const std::filesystem::path& manifest,
                           const TimeSlotConfig& span) {
  span.validate();
  const auto rows = io::split_lines(io::read_file(manifest));
  if (rows.empty()) fail(ErrorKind::Format, "manifest is empty: " + manifest.string());
  std::string header = rows.front();
  if (header.starts_with("\xEF\xBB\xBF")) header.erase(0, 3);
  if (header != "id\tauthor\tyear\ttitle\tpath") {
    fail(ErrorKind::Format, "manifest header must be 'id<TAB>author<TAB>year<TAB>title<TAB>path'");
  }

  IngestResult result;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string& row = rows[r];
    if (row.empty()) continue;
    const auto cols = io::split(row, '\t');
    const std::string id = cols.empty() || cols[0].empty()
                               ? "<line " + std::to_string(r + 1) + ">"
                               : cols[0];
    auto reject = [&](std::string reason) { result.rejections.push_back({id, std::move(reason)}); };
    if (cols.size() != 5) {
      reject("expected 5 columns, found " + std::to_string(cols.size()));
      continue;
    }
    if (cols[0].empty()) {
      reject("empty id");
      continue;
    }
    if (seen.contains(id)) {
      reject("duplicate id");
      continue;
    }
    const auto year = parse_year(cols[2]);
    if (!year) {
      reject("unparseable year '" + cols[2] + "'");
      continue;
    }
    if (*year < span.origin_year || *year > span.end_year) {
      reject("year " + std::to_string(*year) + " outside span " +
             std::to_string(span.origin_year) + "-" + std::to_string(span.end_year));
      continue;
    }
    const std::filesystem::path file = root / cols[4];
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec)) {
      reject("missing file " + cols[4]);
      continue;
    }
    std::vector<std::string> lines;
    try {
      lines = normalize_lines(io::read_file(file));
    } catch (const Error& e) {
      reject(e.what());
      continue;
    }
    if (lines.empty()) {
      reject("empty text");
      continue;
    }
    seen.insert(id);
    result.records.push_back({id, cols[1], *year, cols[3], std::move(lines), cols[4]});
  }
  std::sort(result.records.begin(), result.records.end(), [](const auto& a, const auto& b) {
    return a.year != b.year ? a.year < b.year : a.id < b.id;
  });
  return result;
}

std::vector<StanzaRecord> segment_stanzas(const PoemRecord& poem) {
  std::vector<StanzaRecord> stanzas;
  std::vector<std::string> current;
  auto flush = [&] {
    if (current.empty()) return;
    stanzas.push_back({poem.id, static_cast<int>(stanzas.size()), std::move(current), poem.author,
                       poem.year});
    current.clear();
  };
  for (const auto& line : poem.lines) {
    if (is_blank(line)) {
      flush();
    } else {
      current.push_back(line);
    }
  }
  flush();
  return stanzas;
}

void LanguageFilterConfig::validate() const {
  if (!lexicons.contains(primary)) {
    fail(ErrorKind::Validation, "language filter has no lexicon for '" + primary + "'");
  }
  for (auto a = lexicons.begin(); a != lexicons.end(); ++a) {
    if (a->second.empty()) fail(ErrorKind::Validation, "empty lexicon for '" + a->first + "'");
    for (auto b = std::next(a); b != lexicons.end(); ++b) {
      if (a->second == b->second) {
        fail(ErrorKind::Validation,
             "lexicons for '" + a->first + "' and '" + b->first + "' are identical");
      }
    }
  }
  if (!(german_margin >= 0.0)) fail(ErrorKind::Validation, "language margin must be >= 0");
}

LanguageFilterConfig load_language_filter(const std::filesystem::path& dir,
                                          std::span<const std::string> languages,
                                          double german_margin) {
  LanguageFilterConfig config;
  config.german_margin = german_margin;
  for (const auto& lang : languages) {
    config.lexicons[lang] = load_stopwords(dir / ("stopwords." + lang + ".txt"));
  }
  config.validate();
  return config;
}

LanguageDecision detect_language(std::span<const std::string> tokens,
                                 const LanguageFilterConfig& config) {
  if (tokens.empty()) fail(ErrorKind::Runtime, "language is indeterminate for an empty text");
  LanguageDecision decision;
  const double n = static_cast<double>(tokens.size());
  for (const auto& [lang, lexicon] : config.lexicons) {
    std::size_t hits = 0;
    for (const auto& t : tokens) hits += lexicon.contains(t) ? 1 : 0;
    decision.fractions[lang] = static_cast<double>(hits) / n;
  }
  const double primary = decision.fractions.at(config.primary);
  double top = -1.0;
  for (const auto& [lang, frac] : decision.fractions) {
    if (lang == config.primary) continue;
    if (primary < frac + config.german_margin) decision.keep = false;
    // Strongest competitor, first in code order on ties.
    if (frac > top) {
      top = frac;
      decision.dropped_as = lang;
    }
  }
  if (decision.keep) decision.dropped_as.clear();
  return decision;
}

CorpusStats corpus_stats(std::span<const PoemRecord> corpus, const TimeSlotConfig& config) {
  config.validate();
  if (corpus.empty()) fail(ErrorKind::Runtime, "corpus is empty");
  CorpusStats stats;
  stats.slots = config;
  stats.documents = corpus.size();
  stats.histogram.assign(static_cast<std::size_t>(config.slot_count()), 0);
  std::map<std::string, std::size_t> per_author;
  for (const auto& p : corpus) {
    for (const auto& l : p.lines) stats.tokens += tokenize(l).size();
    ++per_author[p.author];
    ++stats.histogram[static_cast<std::size_t>(assign_time_slot(p.year, config))];
  }
  stats.authors = per_author.size();
  std::vector<std::size_t> counts;
  counts.reserve(per_author.size());
  for (const auto& [_, c] : per_author) counts.push_back(c);
  std::sort(counts.begin(), counts.end());
  stats.poems_per_author_mean =
      static_cast<double>(corpus.size()) / static_cast<double>(counts.size());
  const std::size_t m = counts.size() / 2;
  stats.poems_per_author_median =
      counts.size() % 2 ? static_cast<double>(counts[m])
                        : (static_cast<double>(counts[m - 1]) + static_cast<double>(counts[m])) / 2.0;
  return stats;
}

void write_corpus_store(const std::filesystem::path& path, std::span<const PoemRecord> corpus) {
  std::string out;
  for (const auto& p : corpus) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["author"] = p.author;
    j["year"] = p.year;
    j["title"] = p.title;
    j["source_path"] = p.source_path;
    j["lines"] = p.lines;
    out += j.dump();
    out += '\n';
  }
  io::write_file(path, out);
}

std::vector<PoemRecord> read_corpus_store(const std::filesystem::path& path) {
  std::vector<PoemRecord> corpus;
  std::size_t line_no = 0;
  for (const auto& line : io::split_lines(io::read_file(path))) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PoemRecord p;
      p.id = j.at("id").get<std::string>();
      p.author = j.at("author").get<std::string>();
      p.year = j.at("year").get<int>();
      p.title = j.at("title").get<std::string>();
      p.source_path = j.at("source_path").get<std::string>();
      p.lines = j.at("lines").get<std::vector<std::string>>();
      corpus.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

void write_rejections(const std::filesystem::path& path, std::span<const Rejection> rejections) {
  std::string out = "id\treason\n";
  for (const auto& r : rejections) {
    out += r.id;
    out += '\t';
    out += r.reason;
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace poetopics

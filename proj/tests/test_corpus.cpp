#include <doctest.h>

#include <fstream>

#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"
#include "synth.hpp"

using namespace poetopics;
namespace fs = std::filesystem;

TEST_CASE("time slot examples") {
  const TimeSlotConfig w50{1575, 50, 1925}, w25{1575, 25, 1925};
  CHECK(assign_time_slot(1575, w50) == 0);
  CHECK(assign_time_slot(1624, w50) == 0);
  CHECK(assign_time_slot(1625, w50) == 1);
  CHECK(assign_time_slot(1600, w25) == 1);
  CHECK(assign_time_slot(1925, w50) == 6);
  CHECK(w50.slot_count() == 7);
  CHECK(w25.slot_count() == 14);
  CHECK(w50.slot_end(0) == 1624);
  CHECK(w50.slot_end(6) == 1925);
  CHECK_THROWS_AS(assign_time_slot(1574, w50), Error);
  CHECK_THROWS_AS(assign_time_slot(1926, w50), Error);
  CHECK_THROWS_AS(assign_time_slot(1600, TimeSlotConfig{1575, 0, 1925}), Error);
}

TEST_CASE("time slots are total and monotone") {
  for (int width : {1, 7, 25, 50, 100, 350, 400}) {
    const TimeSlotConfig c{1575, width, 1925};
    int prev = 0;
    for (int y = 1575; y <= 1925; ++y) {
      const int s = assign_time_slot(y, c);
      CHECK(s >= prev);
      CHECK(s < c.slot_count());
      CHECK(y >= c.slot_start(s));
      CHECK(y <= c.slot_end(s));
      prev = s;
    }
  }
}

TEST_CASE("stanza segmentation") {
  PoemRecord p;
  p.id = "p";
  p.lines = {"A", "B", "", "C"};
  auto s = segment_stanzas(p);
  REQUIRE(s.size() == 2);
  CHECK(s[0].lines == std::vector<std::string>{"A", "B"});
  CHECK(s[1].lines == std::vector<std::string>{"C"});
  CHECK(s[1].id() == "p#1");

  p.lines = {"A", "", "", "B"};
  s = segment_stanzas(p);
  REQUIRE(s.size() == 2);
  CHECK(s[0].lines == std::vector<std::string>{"A"});
  CHECK(s[1].lines == std::vector<std::string>{"B"});

  p.lines = {"A", "B", "C"};
  s = segment_stanzas(p);
  REQUIRE(s.size() == 1);
  CHECK(s[0].lines == p.lines);
}

TEST_CASE("stanza concatenation restores the non-blank lines") {
  PoemRecord p;
  p.id = "x";
  p.author = "a";
  p.year = 1700;
  p.lines = {"eins", "zwei", "", "", "drei", "", "vier", "fünf"};
  std::vector<std::string> joined;
  for (const auto& s : segment_stanzas(p)) {
    CHECK(s.year == 1700);
    CHECK(s.author == "a");
    joined.insert(joined.end(), s.lines.begin(), s.lines.end());
  }
  CHECK(joined == std::vector<std::string>{"eins", "zwei", "drei", "vier", "fünf"});
  const auto units = stanza_units(std::span<const PoemRecord>(&p, 1));
  REQUIRE(units.size() == 3);
  CHECK(units[2].id == "x#2");
  CHECK(units[2].poem_id == "x");
  CHECK(poem_units(std::span<const PoemRecord>(&p, 1)).front().lines.size() == 5);
}

namespace {

LanguageFilterConfig small_filter() {
  LanguageFilterConfig c;
  c.lexicons["de"] = {"der", "die", "und"};
  c.lexicons["fr"] = {"le", "la", "et", "je"};
  return c;
}

}  // namespace

TEST_CASE("language detection examples") {
  const auto c = small_filter();
  auto d = detect_language(Tokens{"der", "die", "und"}, c);
  CHECK(d.keep);
  CHECK(d.fractions.at("de") == 1.0);

  d = detect_language(Tokens{"le", "la", "et", "je", "le"}, c);
  CHECK_FALSE(d.keep);
  CHECK(d.dropped_as == "fr");
  CHECK(d.fractions.at("fr") == 1.0);
  CHECK(d.fractions.at("de") == 0.0);

  d = detect_language(Tokens{"der", "le", "mond"}, c);
  CHECK(d.keep);

  auto strict = c;
  strict.german_margin = 0.1;
  CHECK_FALSE(detect_language(Tokens{"der", "le", "mond"}, strict).keep);
  CHECK_THROWS_AS(detect_language(Tokens{}, c), Error);
}

TEST_CASE("language fractions lie in [0,1] and decisions ignore token order") {
  const auto c = small_filter();
  SplitMix64 rng(3);
  const Tokens pool{"der", "die", "und", "le", "la", "et", "je", "mond", "herz"};
  for (int trial = 0; trial < 200; ++trial) {
    Tokens t;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) t.push_back(pool[rng.below(pool.size())]);
    const auto d = detect_language(t, c);
    for (const auto& [_, f] : d.fractions) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
    Tokens r(t.rbegin(), t.rend());
    CHECK(detect_language(r, c).keep == d.keep);
  }
}

TEST_CASE("shipped lexicons separate German and French samples") {
  const std::vector<std::string> langs{"de", "fr", "nl", "la"};
  const auto c = load_language_filter(synth::stopwords_dir(), langs);
  CHECK(detect_language(tokenize("Ich weiß nicht, was soll es bedeuten, dass ich so traurig bin"), c).keep);
  const auto fr = detect_language(tokenize("Le ciel est bleu et la mer est belle, je pense à toi"), c);
  CHECK_FALSE(fr.keep);
  CHECK(fr.dropped_as == "fr");
  const std::vector<std::string> no_de{"fr"};
  CHECK_THROWS_AS(load_language_filter(synth::stopwords_dir(), no_de), Error);
}

TEST_CASE("corpus stats examples") {
  std::vector<PoemRecord> poems(3);
  for (int i = 0; i < 3; ++i) {
    poems[i].id = "p" + std::to_string(i);
    poems[i].author = "a";
    poems[i].lines = {"ein wort"};
  }
  poems[0].year = 1580;
  poems[1].year = 1590;
  poems[2].year = 1630;
  const auto s = corpus_stats(poems, TimeSlotConfig{1575, 25, 1925});
  CHECK(s.documents == 3);
  CHECK(s.tokens == 6);
  CHECK(s.authors == 1);
  CHECK(s.poems_per_author_mean == 3.0);
  CHECK(s.poems_per_author_median == 3.0);
  REQUIRE(s.histogram.size() == 14);
  CHECK(s.histogram[0] == 2);
  CHECK(s.histogram[1] == 0);
  CHECK(s.histogram[2] == 1);
  CHECK_THROWS_AS(corpus_stats(std::vector<PoemRecord>{}, TimeSlotConfig{}), Error);
}

TEST_CASE("ingest toy manifest with bad rows") {
  const auto root = synth::fixture("toy_corpus");
  const auto r = ingest_corpus(root, root / "manifest_bad.tsv");
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].id == "p6");  // 1725 sorts before 1730
  CHECK(r.records[1].id == "p1");
  CHECK(r.records[2].id == "p2");
  CHECK(r.records[1].year == 1730);
  CHECK(r.records[1].lines.size() == 5);  // two stanzas, one blank separator
  REQUIRE(r.rejections.size() == 2);
  CHECK(r.rejections[0].id == "p7");
  CHECK(r.rejections[0].reason.find("MDCCX") != std::string::npos);
  CHECK(r.rejections[1].id == "p8");
  CHECK(r.rejections[1].reason.find("missing") != std::string::npos);
}

TEST_CASE("ingest rejects bad headers and out-of-span years") {
  synth::TempDir tmp;
  io::write_file(tmp / "bad.tsv", "id\tyear\n");
  CHECK_THROWS_AS(ingest_corpus(tmp.path(), tmp / "bad.tsv"), Error);

  io::write_file(tmp / "a.txt", "\xEF\xBB\xBF\n\nZeile eins\nZeile zwei\nZeile drei\nZeile vier\n\n");
  io::write_file(tmp / "m.tsv",
                 "id\tauthor\tyear\ttitle\tpath\n"
                 "a\tX\t1772\tT\ta.txt\n"
                 "b\tX\t1500\tT\ta.txt\n"
                 "a\tX\t1772\tT\ta.txt\n"
                 "c\tX\t1772\n");
  const auto r = ingest_corpus(tmp.path(), tmp / "m.tsv");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].year == 1772);
  CHECK(r.records[0].lines == std::vector<std::string>{"Zeile eins", "Zeile zwei", "Zeile drei", "Zeile vier"});
  REQUIRE(r.rejections.size() == 3);
  CHECK(r.rejections[0].reason.find("outside") != std::string::npos);
  CHECK(r.rejections[1].reason == "duplicate id");
  CHECK(r.rejections[2].reason.find("columns") != std::string::npos);
}

TEST_CASE("corpus store round trip") {
  const auto root = synth::fixture("toy_corpus");
  const auto r = ingest_corpus(root, root / "manifest_de.tsv");
  REQUIRE(r.records.size() == 5);
  synth::TempDir tmp;
  write_corpus_store(tmp / "c.jsonl", r.records);
  CHECK(read_corpus_store(tmp / "c.jsonl") == r.records);
  // Sorted by year, then id.
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    CHECK(r.records[i - 1].year <= r.records[i].year);
  }
  io::write_file(tmp / "junk.jsonl", "{not json\n");
  CHECK_THROWS_AS(read_corpus_store(tmp / "junk.jsonl"), Error);
}

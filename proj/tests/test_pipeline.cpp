#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "error.hpp"
#include "io.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

using namespace poetopics;
namespace fs = std::filesystem;

namespace {

PipelineConfig toy_config(const fs::path& out, const std::string& manifest = "manifest_de.tsv") {
  PipelineConfig c;
  c.corpus_root = synth::fixture("toy_corpus");
  c.manifest = c.corpus_root / manifest;
  c.stopwords_dir = synth::stopwords_dir();
  c.output_dir = out;
  c.min_doc_freq = 1;
  c.max_doc_ratio = 1.0;
  c.lda.topics = 3;
  c.lda.sweeps = 20;
  c.lda.burn_in = 10;
  c.infer_sweeps = 20;
  c.grid_n_trees = {10};
  c.grid_max_depth = {0};
  c.threads = 2;
  return c;
}

PipelineConfig slot_config(const fs::path& corpus, const fs::path& out) {
  PipelineConfig c;
  c.corpus_root = corpus;
  c.manifest = corpus / "manifest.tsv";
  c.stopwords_dir = synth::stopwords_dir();
  c.output_dir = out;
  c.min_doc_freq = 2;
  c.max_doc_ratio = 1.0;
  c.lda.topics = 8;
  c.lda.sweeps = 30;
  c.lda.burn_in = 20;
  c.infer_sweeps = 20;
  c.grid_n_trees = {30};
  c.grid_max_depth = {0};
  return c;
}

const Logger quiet = [](LogLevel, std::string_view) {};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Runtime;
}

}  // namespace

TEST_CASE("config defaults mirror the reference settings") {
  PipelineConfig c;
  CHECK(c.get("lda.topics") == "100");
  CHECK(c.get("lda.sweeps") == "50");
  CHECK(c.get("lda.alpha") == "auto");
  CHECK(c.get("trends.slot_width") == "25");
  CHECK(c.get("classify.slot_width") == "50");
  CHECK(c.get("classify.split_ratio") == "0.7");
  CHECK(c.get("classify.top_authors") == "180");
  CHECK(c.get("classify.unit") == "stanza");
  CHECK(c.get("classify.features") == "combined");
  CHECK(c.get("corpus.origin_year") == "1575");
  CHECK(c.get("corpus.end_year") == "1925");
  CHECK(c.grid().size() == 4);
}

TEST_CASE("config set and get") {
  PipelineConfig c;
  for (const auto& k : PipelineConfig::keys()) {
    PipelineConfig d;
    CHECK_NOTHROW(d.set(k, c.get(k)));
    CHECK(d.get(k) == c.get(k));
  }
  c.set("lda.alpha", "0.05");
  CHECK(c.lda.alpha_value() == 0.05);
  c.set("lda.alpha", "auto");
  CHECK_FALSE(c.lda.alpha.has_value());
  c.set("classify.grid.max_depth", "none, 8");
  CHECK(c.get("classify.grid.max_depth") == "none,8");
  c.set("seed", "42");
  CHECK(c.seed == 42);
  CHECK(kind_of([&] { c.set("lda.topicz", "3"); }) == ErrorKind::Validation);
  CHECK(kind_of([&] { c.set("lda.topics", "three"); }) == ErrorKind::Validation);
  CHECK(kind_of([&] { c.set("classify.unit", "line"); }) == ErrorKind::Validation);
}

TEST_CASE("toml config with relative paths and overrides") {
  synth::TempDir tmp;
  io::write_file(tmp / "run.toml",
                 "seed = 7\n"
                 "[paths]\ncorpus_root = \"corpus\"\noutput_dir = \"out\"\n"
                 "[lda]\ntopics = 12\nalpha = \"auto\"\n"
                 "[classify]\nunit = \"poem\"\n[classify.grid]\nn_trees = [10, 20]\n");
  PipelineConfig c;
  c.load_toml(tmp / "run.toml");
  CHECK(c.corpus_root == tmp / "corpus");
  CHECK(c.output_dir == tmp / "out");
  CHECK(c.lda.topics == 12);
  CHECK(c.seed == 7);
  CHECK(c.unit == "poem");
  CHECK(c.grid_n_trees == std::vector<int>{10, 20});
  c.set("lda.topics", "5");  // flags applied after the file win
  CHECK(c.lda.topics == 5);

  io::write_file(tmp / "bad.toml", "[lda]\ntopics = \n");
  CHECK(kind_of([&] { c.load_toml(tmp / "bad.toml"); }) == ErrorKind::Validation);
  io::write_file(tmp / "unknown.toml", "[lda]\nsweepz = 3\n");
  CHECK(kind_of([&] { c.load_toml(tmp / "unknown.toml"); }) == ErrorKind::Validation);
}

TEST_CASE("validation happens before any output is written") {
  synth::TempDir tmp;
  auto c = toy_config(tmp / "out");
  c.manifest = tmp / "nope.tsv";
  CHECK(kind_of([&] { cmd_ingest(c, quiet); }) == ErrorKind::Validation);
  CHECK_FALSE(fs::exists(tmp / "out"));

  c = toy_config(tmp / "out");
  try {
    cmd_train(c, quiet);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("ingest") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(tmp / "out"));
  c.lda.burn_in = 50;
  c.lda.sweeps = 20;
  CHECK(kind_of([&] { c.validate_for("train"); }) == ErrorKind::Validation);
}

TEST_CASE("ingest the toy corpus") {
  synth::TempDir tmp;
  const auto s = cmd_ingest(toy_config(tmp / "a"), quiet);
  CHECK(s.kept == 5);
  CHECK(s.rejected == 0);
  CHECK(read_corpus_store(tmp / "a" / "corpus" / "corpus.jsonl").size() == 5);
  for (const char* f : {"stats.json", "slot_histogram.csv", "slot_histogram.svg", "rejections.tsv"}) {
    CHECK(fs::exists(tmp / "a" / "corpus" / f));
  }
  const auto stats = nlohmann::json::parse(io::read_file(tmp / "a" / "corpus" / "stats.json"));
  CHECK(stats["documents"] == 5);
  CHECK(stats["authors"] == 3);

  cmd_ingest(toy_config(tmp / "b"), quiet);
  CHECK(synth::snapshot(tmp / "a") == synth::snapshot(tmp / "b"));
}

TEST_CASE("ingest drops the French poem") {
  synth::TempDir tmp;
  const auto s = cmd_ingest(toy_config(tmp.path(), "manifest_mixed.tsv"), quiet);
  CHECK(s.kept == 4);
  CHECK(s.rejected == 1);
  const auto rows = io::split_lines(io::read_file(tmp / "corpus" / "rejections.tsv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].starts_with("p5\tlanguage fr"));
}

TEST_CASE("ingest reports bad manifest rows") {
  synth::TempDir tmp;
  const auto s = cmd_ingest(toy_config(tmp.path(), "manifest_bad.tsv"), quiet);
  CHECK(s.kept == 3);
  CHECK(s.rejected == 2);
}

TEST_CASE("train, stats and trends on the toy corpus") {
  synth::TempDir tmp;
  const auto c = toy_config(tmp.path());
  cmd_ingest(c, quiet);
  const auto model = cmd_train(c, quiet);
  CHECK(model.num_topics() == 3);
  for (const char* f : {"model.meta.json", "phi.f64le", "theta.f64le", "vocab.txt", "docs.txt",
                        "training_log.csv", "bow.tsv", "topics.txt"}) {
    CHECK(fs::exists(tmp / "model" / f));
  }
  const auto log = io::split_lines(io::read_file(tmp / "model" / "training_log.csv"));
  CHECK(log.size() == 21);
  // German stopwords never reach the vocabulary.
  const auto vocab = io::read_file(tmp / "model" / "vocab.txt");
  CHECK(vocab.find("\nder\n") == std::string::npos);
  CHECK_FALSE(vocab.starts_with("der\n"));

  const auto files = cmd_trends(c, quiet);
  CHECK(files.size() == 4);
  CHECK(fs::exists(tmp / "trends" / "trends.csv"));
  CHECK(fs::exists(tmp / "trends" / "topic_2.svg"));
  CHECK(io::split_lines(io::read_file(tmp / "trends" / "trends.csv")).size() == 1 + 3 * 14);

  const auto stats = cmd_stats(c, quiet);
  CHECK(stats.documents == 5);
}

TEST_CASE("an existing lock file blocks a run") {
  synth::TempDir tmp;
  const auto c = toy_config(tmp.path());
  io::write_file(tmp / ".poetopics.lock", "");
  CHECK(kind_of([&] { cmd_ingest(c, quiet); }) == ErrorKind::Runtime);
  fs::remove(tmp / ".poetopics.lock");
  CHECK_NOTHROW(cmd_ingest(c, quiet));
  CHECK_FALSE(fs::exists(tmp / ".poetopics.lock"));
}

TEST_CASE("planted corpus through the train command") {
  synth::TempDir tmp;
  const auto planted = synth::planted_corpus(100, 50, 50, 3);
  std::ostringstream manifest;
  manifest << "id\tauthor\tyear\ttitle\tpath\n";
  fs::create_directories(tmp / "corpus" / "poems");
  for (std::size_t d = 0; d < planted.bows.size(); ++d) {
    std::string text;
    int n = 0;
    for (const auto& e : planted.bows[d].entries) {
      for (std::uint32_t i = 0; i < e.count; ++i) {
        text += planted.vocab.word(e.word);
        text += ++n % 10 == 0 ? "\n" : " ";
      }
    }
    const std::string id = "d" + std::to_string(d);
    io::write_file(tmp / "corpus" / "poems" / (id + ".txt"), text);
    manifest << id << "\tA\t" << 1600 + d % 300 << "\tT\tpoems/" << id << ".txt\n";
  }
  io::write_file(tmp / "corpus" / "manifest.tsv", manifest.str());

  auto c = toy_config(tmp / "out");
  c.corpus_root = tmp / "corpus";
  c.manifest = tmp / "corpus" / "manifest.tsv";
  c.lda.topics = 2;
  c.lda.sweeps = 50;
  c.lda.burn_in = 40;
  cmd_ingest(c, quiet);
  const auto model = cmd_train(c, quiet);
  // Reorder the generating distributions into the model's vocabulary order.
  Matrix truth(2, model.vocab_size());
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    const auto src = planted.vocab.find(model.vocabulary[w]);
    REQUIRE(src >= 0);
    for (std::size_t k = 0; k < 2; ++k) truth(k, w) = planted.phi(k, static_cast<std::size_t>(src));
  }
  for (double tv : synth::matched_tv(model.phi, truth)) CHECK(tv <= 0.15);
}

TEST_CASE("classification on a slot-separable corpus") {
  synth::TempDir tmp;
  synth::SlotCorpusSpec spec;
  spec.poems_per_slot = 12;
  synth::write_slot_corpus(tmp / "corpus", spec);
  auto c = slot_config(tmp / "corpus", tmp / "out");
  cmd_ingest(c, quiet);
  cmd_train(c, quiet);

  SUBCASE("combined features") {
    const auto r = cmd_classify(c, quiet);
    CHECK(r.accuracy >= 0.9);
    CHECK(r.class_names.size() == 7);
    CHECK(r.importances.size() == 7 + 8);
    const auto dir = tmp / "out" / "classify" / "period-stanza-combined";
    for (const char* f : {"report.json", "report.txt", "confusion.csv", "importances.csv", "style_features.tsv"}) {
      CHECK(fs::exists(dir / f));
    }
    const auto j = nlohmann::json::parse(io::read_file(dir / "report.json"));
    CHECK(j["importances"].size() == 15);
    CHECK(j["grid"].size() == 1);
    CHECK(j["majority_baseline"].get<double>() < r.accuracy);
  }
  SUBCASE("style only") {
    c.features = "style";
    const auto r = cmd_classify(c, quiet);
    CHECK(r.importances.size() == 7);
  }
  SUBCASE("poem units reuse training mixtures") {
    c.unit = "poem";
    c.features = "lda";
    const auto r = cmd_classify(c, quiet);
    CHECK(r.test_size + r.train_size == 84);
    CHECK(r.accuracy >= 0.9);
  }
  SUBCASE("authorship labels are author names") {
    c.task = "author";
    c.top_authors = 2;
    const auto r = cmd_classify(c, quiet);
    REQUIRE(r.class_names.size() == 2);
    CHECK(r.class_names[0].starts_with("Autor "));
  }
  SUBCASE("grouped split") {
    c.grouped_split = true;
    const auto r = cmd_classify(c, quiet);
    REQUIRE_FALSE(r.notes.empty());
  }
}

// Exercises the shared library through the public C header only.
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "poetopics/poetopics.h"

namespace fs = std::filesystem;

namespace {

struct Config {
  pt_config* p = nullptr;
  Config() { REQUIRE(pt_config_create(&p) == PT_OK); }
  ~Config() { pt_config_destroy(p); }
  void set(const char* k, const std::string& v) { REQUIRE_MESSAGE(pt_config_set(p, k, v.c_str()) == PT_OK, pt_last_error()); }
};

fs::path temp_dir() {
  std::string pattern = (fs::temp_directory_path() / "poetopics-capi-XXXXXX").string();
  REQUIRE(::mkdtemp(pattern.data()) != nullptr);
  return pattern;
}

void count_messages(void* user, pt_log_level, const char*) { ++*static_cast<int*>(user); }

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(pt_version()).size() > 0);
  CHECK(std::string(pt_status_name(PT_OK)) == "ok");
  CHECK(std::string(pt_status_name(PT_ERR_FORMAT)) == "format error");
}

TEST_CASE("config keys through the C surface") {
  Config c;
  c.set("lda.topics", "7");
  char buf[8];
  size_t needed = 0;
  CHECK(pt_config_get(c.p, "lda.topics", buf, sizeof buf, &needed) == PT_OK);
  CHECK(std::string(buf) == "7");
  CHECK(needed == 1);
  CHECK(pt_config_get(c.p, "classify.features", buf, 4, &needed) == PT_OK);
  CHECK(std::string(buf) == "com");
  CHECK(needed == 8);
  CHECK(pt_config_set(c.p, "no.such.key", "1") == PT_ERR_VALIDATION);
  CHECK(std::string(pt_last_error()).find("no.such.key") != std::string::npos);
  CHECK(pt_config_set(nullptr, "lda.topics", "1") == PT_ERR_VALIDATION);
  CHECK(pt_config_validate(c.p, "ingest") == PT_ERR_VALIDATION);
}

TEST_CASE("utilities") {
  pt_syllables s{};
  CHECK(pt_syllabify("tugend", &s) == PT_OK);
  CHECK(s.syllables == 2);
  CHECK(s.open == 1);
  CHECK(s.closed == 1);
  CHECK(pt_syllabify("", &s) == PT_ERR_VALIDATION);
  int slot = -1;
  CHECK(pt_time_slot(1625, 1575, 50, 1925, &slot) == PT_OK);
  CHECK(slot == 1);
  CHECK(pt_time_slot(1500, 1575, 50, 1925, &slot) == PT_ERR_RUNTIME);
}

TEST_CASE("pipeline and model handles") {
  const fs::path root = POETOPICS_SOURCE_DIR;
  const fs::path out = temp_dir();
  Config c;
  c.set("paths.corpus_root", (root / "tests/fixtures/toy_corpus").string());
  c.set("paths.manifest", (root / "tests/fixtures/toy_corpus/manifest_mixed.tsv").string());
  c.set("paths.stopwords_dir", (root / "data/stopwords").string());
  c.set("paths.output_dir", out.string());
  c.set("textproc.min_doc_freq", "1");
  c.set("textproc.max_doc_ratio", "1");
  c.set("lda.topics", "2");
  c.set("lda.sweeps", "10");
  c.set("lda.burn_in", "5");
  int messages = 0;
  pt_config_set_logger(c.p, count_messages, &messages);

  CHECK(pt_cmd_train(c.p) == PT_ERR_VALIDATION);
  REQUIRE_MESSAGE(pt_cmd_ingest(c.p) == PT_OK, pt_last_error());
  REQUIRE_MESSAGE(pt_cmd_train(c.p) == PT_OK, pt_last_error());
  REQUIRE_MESSAGE(pt_cmd_trends(c.p) == PT_OK, pt_last_error());
  CHECK(messages > 0);

  pt_model* m = nullptr;
  REQUIRE(pt_model_load((out / "model").string().c_str(), &m) == PT_OK);
  CHECK(pt_model_num_topics(m) == 2);
  CHECK(pt_model_num_docs(m) == 4);
  CHECK(pt_model_vocab_size(m) > 10);
  const char* word = nullptr;
  double prob = 0.0;
  CHECK(pt_model_top_word(m, 0, 0, &word, &prob) == PT_OK);
  CHECK(word != nullptr);
  CHECK(prob > 0.0);
  CHECK(pt_model_top_word(m, 5, 0, &word, &prob) == PT_ERR_VALIDATION);

  std::vector<double> theta(2);
  CHECK(pt_model_doc_topics(m, 0, theta.data(), theta.size()) == PT_OK);
  CHECK(std::abs(theta[0] + theta[1] - 1.0) < 1e-9);
  const std::string sw = (root / "data/stopwords/stopwords.de.txt").string();
  CHECK(pt_model_infer_text(m, "Die Rosen duften in dem Tal", sw.c_str(), 20, 3, theta.data(), 2) == PT_OK);
  CHECK(std::abs(theta[0] + theta[1] - 1.0) < 1e-9);
  CHECK(pt_model_infer_text(m, "xyzzy", sw.c_str(), 20, 3, theta.data(), 2) == PT_ERR_RUNTIME);
  pt_model_destroy(m);

  CHECK(pt_model_load((out / "missing").string().c_str(), &m) == PT_ERR_IO);
  fs::remove_all(out);
}

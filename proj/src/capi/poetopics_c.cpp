#include "poetopics/poetopics.h"

#include <cstring>
#include <new>
#include <string>

#include "config.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "lda.hpp"
#include "pipeline.hpp"
#include "stylometry.hpp"

struct pt_config {
  poetopics::PipelineConfig config;
  pt_log_fn log_fn = nullptr;
  void* log_user = nullptr;

  poetopics::Logger logger() const {
    if (!log_fn) return {};
    return [fn = log_fn, user = log_user](poetopics::LogLevel level, std::string_view msg) {
      const std::string text(msg);
      fn(user, level == poetopics::LogLevel::Warning ? PT_LOG_WARNING : PT_LOG_INFO, text.c_str());
    };
  }
};

struct pt_model {
  poetopics::TopicModel model;
  // Lazily filled rank tables, one per topic.
  mutable std::vector<std::vector<poetopics::WordProb>> ranked;
};

namespace {

thread_local std::string g_last_error;

pt_status status_of(poetopics::ErrorKind kind) {
  switch (kind) {
    case poetopics::ErrorKind::Validation: return PT_ERR_VALIDATION;
    case poetopics::ErrorKind::Runtime: return PT_ERR_RUNTIME;
    case poetopics::ErrorKind::Io: return PT_ERR_IO;
    case poetopics::ErrorKind::Format: return PT_ERR_FORMAT;
  }
  return PT_ERR_INTERNAL;
}

template <typename F>
pt_status guarded(F&& body) {
  try {
    body();
    return PT_OK;
  } catch (const poetopics::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PT_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return PT_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PT_ERR_INTERNAL;
  }
}

pt_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return PT_ERR_VALIDATION;
}

}  // namespace

extern "C" {

const char* pt_version(void) { return "0.1.0"; }

const char* pt_last_error(void) { return g_last_error.c_str(); }

const char* pt_status_name(pt_status status) {
  switch (status) {
    case PT_OK: return "ok";
    case PT_ERR_VALIDATION: return "validation error";
    case PT_ERR_RUNTIME: return "runtime error";
    case PT_ERR_IO: return "i/o error";
    case PT_ERR_FORMAT: return "format error";
    case PT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

pt_status pt_config_create(pt_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new pt_config(); });
}

void pt_config_destroy(pt_config* config) { delete config; }

pt_status pt_config_load_file(pt_config* config, const char* path) {
  if (!config || !path) return null_argument("config/path");
  return guarded([&] { config->config.load_toml(path); });
}

pt_status pt_config_set(pt_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return null_argument("config/key/value");
  return guarded([&] { config->config.set(key, value); });
}

pt_status pt_config_get(const pt_config* config, const char* key, char* buf, size_t buf_size,
                        size_t* needed) {
  if (!config || !key) return null_argument("config/key");
  return guarded([&] {
    const std::string value = config->config.get(key);
    if (needed) *needed = value.size();
    if (buf && buf_size > 0) {
      const std::size_t n = std::min(value.size(), buf_size - 1);
      std::memcpy(buf, value.data(), n);
      buf[n] = '\0';
    }
  });
}

void pt_config_set_logger(pt_config* config, pt_log_fn fn, void* user) {
  if (!config) return;
  config->log_fn = fn;
  config->log_user = user;
}

pt_status pt_config_validate(const pt_config* config, const char* command) {
  if (!config || !command) return null_argument("config/command");
  return guarded([&] { config->config.validate_for(command); });
}

pt_status pt_cmd_ingest(const pt_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { poetopics::cmd_ingest(config->config, config->logger()); });
}

pt_status pt_cmd_stats(const pt_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { poetopics::cmd_stats(config->config, config->logger()); });
}

pt_status pt_cmd_train(const pt_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { poetopics::cmd_train(config->config, config->logger()); });
}

pt_status pt_cmd_trends(const pt_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { poetopics::cmd_trends(config->config, config->logger()); });
}

pt_status pt_cmd_classify(const pt_config* config, double* accuracy) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const auto report = poetopics::cmd_classify(config->config, config->logger());
    if (accuracy) *accuracy = report.accuracy;
  });
}

pt_status pt_cmd_reproduce_paper(const pt_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const std::string table = poetopics::cmd_reproduce_paper(config->config, config->logger());
    if (config->log_fn) config->log_fn(config->log_user, PT_LOG_INFO, table.c_str());
  });
}

pt_status pt_model_load(const char* dir, pt_model** out) {
  if (!dir || !out) return null_argument("dir/out");
  return guarded([&] {
    auto model = std::make_unique<pt_model>();
    model->model = poetopics::load_model(dir);
    model->ranked.resize(model->model.num_topics());
    *out = model.release();
  });
}

void pt_model_destroy(pt_model* model) { delete model; }

size_t pt_model_num_topics(const pt_model* model) { return model ? model->model.num_topics() : 0; }
size_t pt_model_vocab_size(const pt_model* model) { return model ? model->model.vocab_size() : 0; }
size_t pt_model_num_docs(const pt_model* model) { return model ? model->model.num_docs() : 0; }

pt_status pt_model_top_word(const pt_model* model, size_t topic, size_t rank, const char** word,
                            double* prob) {
  if (!model || !word) return null_argument("model/word");
  return guarded([&] {
    if (topic >= model->model.num_topics()) {
      poetopics::fail(poetopics::ErrorKind::Validation, "topic index out of range");
    }
    if (rank >= model->model.vocab_size()) {
      poetopics::fail(poetopics::ErrorKind::Validation, "rank out of range");
    }
    auto& ranked = model->ranked[topic];
    if (ranked.empty()) {
      ranked = poetopics::top_words(model->model, static_cast<int>(topic), model->model.vocab_size());
    }
    *word = ranked[rank].word.c_str();
    if (prob) *prob = ranked[rank].prob;
  });
}

pt_status pt_model_doc_topics(const pt_model* model, size_t doc, double* out, size_t out_len) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] {
    if (doc >= model->model.num_docs()) {
      poetopics::fail(poetopics::ErrorKind::Validation, "document index out of range");
    }
    if (out_len < model->model.num_topics()) {
      poetopics::fail(poetopics::ErrorKind::Validation, "output buffer shorter than topic count");
    }
    const auto row = model->model.theta.row(doc);
    std::copy(row.begin(), row.end(), out);
  });
}

pt_status pt_model_infer_text(const pt_model* model, const char* text, const char* stopwords_path,
                              int sweeps, uint64_t seed, double* out, size_t out_len) {
  if (!model || !text || !out) return null_argument("model/text/out");
  return guarded([&] {
    if (out_len < model->model.num_topics()) {
      poetopics::fail(poetopics::ErrorKind::Validation, "output buffer shorter than topic count");
    }
    poetopics::StopwordSet stopwords;
    if (stopwords_path) stopwords = poetopics::load_stopwords(stopwords_path);
    const std::string line(text);
    const std::span<const std::string> lines(&line, 1);
    const poetopics::Vocabulary vocab(model->model.vocabulary);
    const auto bow = poetopics::to_bow(poetopics::topic_tokens(lines, stopwords), vocab, "text");
    const auto theta = poetopics::infer_document_topics(model->model, bow, sweeps, seed);
    std::copy(theta.begin(), theta.end(), out);
  });
}

pt_status pt_syllabify(const char* word, pt_syllables* out) {
  if (!word || !out) return null_argument("word/out");
  return guarded([&] {
    if (!*word) poetopics::fail(poetopics::ErrorKind::Validation, "empty word");
    const auto a = poetopics::syllabify(word);
    out->syllables = a.syllable_count;
    out->closed = a.closed_count;
    out->open = a.open_count;
  });
}

pt_status pt_time_slot(int year, int origin_year, int slot_width, int end_year, int* slot) {
  if (!slot) return null_argument("slot");
  return guarded([&] {
    *slot = poetopics::assign_time_slot(year, {origin_year, slot_width, end_year});
  });
}

}  // extern "C"

#ifndef POETOPICS_POETOPICS_H
#define POETOPICS_POETOPICS_H

/*
 * C interface to the poetopics toolkit: diachronic topic modeling and
 * stylometric period/author classification for poetry corpora.
 *
 * All functions return a pt_status. On failure pt_last_error() describes the
 * most recent error on the calling thread. Handles are opaque and owned by
 * the caller; release them with the matching *_destroy function.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(POETOPICS_BUILDING_LIB)
#define PT_API __declspec(dllexport)
#else
#define PT_API __declspec(dllimport)
#endif
#else
#define PT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pt_status {
  PT_OK = 0,
  PT_ERR_VALIDATION = 1, /* bad configuration, arguments or missing inputs */
  PT_ERR_RUNTIME = 2,    /* data could not be processed */
  PT_ERR_IO = 3,
  PT_ERR_FORMAT = 4,     /* malformed, corrupt or incompatible file */
  PT_ERR_INTERNAL = 5
} pt_status;

typedef enum pt_log_level { PT_LOG_INFO = 0, PT_LOG_WARNING = 1 } pt_log_level;

typedef void (*pt_log_fn)(void* user, pt_log_level level, const char* message);

typedef struct pt_config pt_config;
typedef struct pt_model pt_model;

PT_API const char* pt_version(void);
/* Thread-local; valid until the next failing call on the same thread. */
PT_API const char* pt_last_error(void);
PT_API const char* pt_status_name(pt_status status);

/* ---- configuration ---------------------------------------------------- */

PT_API pt_status pt_config_create(pt_config** out);
PT_API void pt_config_destroy(pt_config* config);
/* Applies a TOML file on top of the current values. */
PT_API pt_status pt_config_load_file(pt_config* config, const char* path);
/* Dotted TOML key, e.g. "lda.topics" or "classify.unit". */
PT_API pt_status pt_config_set(pt_config* config, const char* key, const char* value);
/* Copies the text form of a key into buf (NUL-terminated, truncated to
 * buf_size). *needed receives the full length excluding the terminator. */
PT_API pt_status pt_config_get(const pt_config* config, const char* key, char* buf,
                               size_t buf_size, size_t* needed);
PT_API void pt_config_set_logger(pt_config* config, pt_log_fn fn, void* user);
/* command: "ingest", "train", "trends", "classify", "stats", "reproduce-paper" */
PT_API pt_status pt_config_validate(const pt_config* config, const char* command);

/* ---- pipeline commands ------------------------------------------------ */

PT_API pt_status pt_cmd_ingest(const pt_config* config);
PT_API pt_status pt_cmd_stats(const pt_config* config);
PT_API pt_status pt_cmd_train(const pt_config* config);
PT_API pt_status pt_cmd_trends(const pt_config* config);
/* accuracy may be NULL. */
PT_API pt_status pt_cmd_classify(const pt_config* config, double* accuracy);
PT_API pt_status pt_cmd_reproduce_paper(const pt_config* config);

/* ---- topic models ----------------------------------------------------- */

PT_API pt_status pt_model_load(const char* dir, pt_model** out);
PT_API void pt_model_destroy(pt_model* model);
PT_API size_t pt_model_num_topics(const pt_model* model);
PT_API size_t pt_model_vocab_size(const pt_model* model);
PT_API size_t pt_model_num_docs(const pt_model* model);
/* rank-th most probable word of a topic. *word stays valid while the model
 * lives. */
PT_API pt_status pt_model_top_word(const pt_model* model, size_t topic, size_t rank,
                                   const char** word, double* prob);
/* Copies one row of theta (num_topics doubles). */
PT_API pt_status pt_model_doc_topics(const pt_model* model, size_t doc, double* out,
                                     size_t out_len);
/* Folds an unseen text into the model. out receives num_topics doubles. */
PT_API pt_status pt_model_infer_text(const pt_model* model, const char* text,
                                     const char* stopwords_path, int sweeps, uint64_t seed,
                                     double* out, size_t out_len);

/* ---- text utilities --------------------------------------------------- */

typedef struct pt_syllables {
  int syllables;
  int closed;
  int open;
} pt_syllables;

PT_API pt_status pt_syllabify(const char* word, pt_syllables* out);
PT_API pt_status pt_time_slot(int year, int origin_year, int slot_width, int end_year,
                              int* slot);

#ifdef __cplusplus
}
#endif

#endif /* POETOPICS_POETOPICS_H */

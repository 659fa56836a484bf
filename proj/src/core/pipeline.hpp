#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "classify.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "lda.hpp"

namespace poetopics {

enum class LogLevel { Info = 0, Warning = 1 };
using Logger = std::function<void(LogLevel, std::string_view)>;

/// Exclusive-create lock file in the output directory, removed on destruction.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct IngestSummary {
  std::size_t kept = 0;
  std::size_t rejected = 0;
  CorpusStats stats;
};

IngestSummary cmd_ingest(const PipelineConfig& config, const Logger& log);
CorpusStats cmd_stats(const PipelineConfig& config, const Logger& log);
TopicModel cmd_train(const PipelineConfig& config, const Logger& log);
std::vector<std::filesystem::path> cmd_trends(const PipelineConfig& config, const Logger& log);
EvalReport cmd_classify(const PipelineConfig& config, const Logger& log);
/// Runs the whole pipeline with the reference settings and returns the
/// comparison table that is also written to reproduce/summary.txt.
std::string cmd_reproduce_paper(const PipelineConfig& config, const Logger& log);

std::string stats_json(const CorpusStats& stats);
std::string stats_text(const CorpusStats& stats);

/// Tokens used for topic modeling: all lines, German stopwords removed.
Tokens topic_tokens(std::span<const std::string> lines, const StopwordSet& stopwords);

}  // namespace poetopics

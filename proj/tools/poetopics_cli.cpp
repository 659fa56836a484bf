// Command-line front end. Links only the C interface of libpoetopics.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "poetopics/poetopics.h"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void print_log(void*, pt_log_level level, const char* message) {
  if (level == PT_LOG_WARNING) {
    std::fprintf(stderr, "warning: %s\n", message);
  } else {
    std::fprintf(stdout, "%s\n", message);
    std::fflush(stdout);
  }
}

int exit_code(pt_status status) {
  if (status == PT_OK) return 0;
  std::fprintf(stderr, "error: %s\n", pt_last_error());
  return status == PT_ERR_VALIDATION ? kExitValidation : kExitRuntime;
}

struct ConfigDeleter {
  void operator()(pt_config* c) const { pt_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<pt_config, ConfigDeleter>;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poetopics: topic trends and period/author classification for poetry corpora"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> unit, features, task, output, corpus_root, manifest, stopwords;
  std::optional<int> slot_width, topics, sweeps;
  std::vector<std::string> overrides;

  app.add_option("--config", config_path, "TOML configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (u64)");
  app.add_option("--unit", unit, "Classification unit")->check(CLI::IsMember({"stanza", "poem"}));
  app.add_option("--features", features, "Feature set")
      ->check(CLI::IsMember({"style", "lda", "combined"}));
  app.add_option("--task", task, "Classification target")->check(CLI::IsMember({"period", "author"}));
  app.add_option("--slot-width", slot_width,
                 "Slot width in years (trends for ingest/stats/trends, labels for classify)");
  app.add_option("--topics", topics, "Number of topics");
  app.add_option("--sweeps", sweeps, "Gibbs sweeps");
  app.add_option("--out", output, "Output directory");
  app.add_option("--corpus-root", corpus_root, "Directory holding the poem files");
  app.add_option("--manifest", manifest, "Manifest TSV");
  app.add_option("--stopwords", stopwords, "Directory with stopwords.<lang>.txt files");
  app.add_option("--set", overrides, "Override any config key: key=value (repeatable)");

  auto* ingest = app.add_subcommand("ingest", "Read the corpus, filter languages, write the corpus store");
  auto* train = app.add_subcommand("train", "Train the topic model");
  auto* trends = app.add_subcommand("trends", "Per-slot topic trend tables and charts");
  auto* classify = app.add_subcommand("classify", "Random forest period or author classification");
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  auto* reproduce = app.add_subcommand("reproduce-paper",
                                       "Whole pipeline with the reference settings and reference numbers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  pt_config* raw = nullptr;
  if (pt_config_create(&raw) != PT_OK) return exit_code(PT_ERR_INTERNAL);
  ConfigPtr config(raw);
  pt_config_set_logger(config.get(), print_log, nullptr);

  std::string command;
  for (auto* sub : {ingest, train, trends, classify, stats, reproduce}) {
    if (sub->parsed()) command = sub->get_name();
  }

  // Precedence: flags > config file > defaults.
  auto apply = [&](const char* key, const std::string& value) {
    return pt_config_set(config.get(), key, value.c_str());
  };
  pt_status st = PT_OK;
  if (!config_path.empty()) st = pt_config_load_file(config.get(), config_path.c_str());
  if (st == PT_OK && seed) st = apply("seed", std::to_string(*seed));
  if (st == PT_OK && unit) st = apply("classify.unit", *unit);
  if (st == PT_OK && features) st = apply("classify.features", *features);
  if (st == PT_OK && task) st = apply("classify.task", *task);
  if (st == PT_OK && slot_width) {
    st = apply(command == "classify" ? "classify.slot_width" : "trends.slot_width",
               std::to_string(*slot_width));
  }
  if (st == PT_OK && topics) st = apply("lda.topics", std::to_string(*topics));
  if (st == PT_OK && sweeps) st = apply("lda.sweeps", std::to_string(*sweeps));
  if (st == PT_OK && output) st = apply("paths.output_dir", *output);
  if (st == PT_OK && corpus_root) st = apply("paths.corpus_root", *corpus_root);
  if (st == PT_OK && manifest) st = apply("paths.manifest", *manifest);
  if (st == PT_OK && stopwords) st = apply("paths.stopwords_dir", *stopwords);
  for (const auto& kv : overrides) {
    if (st != PT_OK) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return kExitValidation;
    }
    st = apply(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  if (st != PT_OK) return exit_code(st);

  st = pt_config_validate(config.get(), command.c_str());
  if (st != PT_OK) return exit_code(st);

  if (command == "ingest") {
    st = pt_cmd_ingest(config.get());
  } else if (command == "train") {
    st = pt_cmd_train(config.get());
  } else if (command == "trends") {
    st = pt_cmd_trends(config.get());
  } else if (command == "classify") {
    double accuracy = 0.0;
    st = pt_cmd_classify(config.get(), &accuracy);
    if (st == PT_OK) std::printf("accuracy %.4f\n", accuracy);
  } else if (command == "stats") {
    st = pt_cmd_stats(config.get());
  } else if (command == "reproduce-paper") {
    st = pt_cmd_reproduce_paper(config.get());
  }
  return exit_code(st);
}

#include "pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"
#include "stylometry.hpp"
#include "trends.hpp"

namespace poetopics {

OutputLock::OutputLock(const std::filesystem::path& dir) : path_(dir / ".poetopics.lock") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  std::FILE* f = std::fopen(path_.string().c_str(), "wx");
  if (!f) {
    fail(ErrorKind::Runtime, "output directory " + dir.string() +
                                 " is locked by another run (delete .poetopics.lock if stale)");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

Tokens topic_tokens(std::span<const std::string> lines, const StopwordSet& stopwords) {
  Tokens all;
  for (const auto& line : lines) {
    for (auto& t : tokenize(line)) {
      if (!stopwords.contains(t)) all.push_back(std::move(t));
    }
  }
  return all;
}

std::string stats_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["documents"] = s.documents;
  j["tokens"] = s.tokens;
  j["authors"] = s.authors;
  j["poems_per_author_mean"] = s.poems_per_author_mean;
  j["poems_per_author_median"] = s.poems_per_author_median;
  j["slot_width_years"] = s.slots.slot_width_years;
  auto& h = j["histogram"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.histogram.size(); ++i) {
    const int slot = static_cast<int>(i);
    h.push_back({{"slot", slot},
                 {"start", s.slots.slot_start(slot)},
                 {"end", s.slots.slot_end(slot)},
                 {"documents", s.histogram[i]}});
  }
  return j.dump(2) + "\n";
}

std::string stats_text(const CorpusStats& s) {
  std::string out;
  out += "documents: " + std::to_string(s.documents) + "\n";
  out += "tokens:    " + std::to_string(s.tokens) + "\n";
  out += "authors:   " + std::to_string(s.authors) + "\n";
  out += "poems per author: mean " + io::format_fixed(s.poems_per_author_mean, 1) + ", median " +
         io::format_fixed(s.poems_per_author_median, 1) + "\n";
  out += "documents per " + std::to_string(s.slots.slot_width_years) + "-year slot:\n";
  for (std::size_t i = 0; i < s.histogram.size(); ++i) {
    const int slot = static_cast<int>(i);
    out += "  " + std::to_string(s.slots.slot_start(slot)) + "-" + std::to_string(s.slots.slot_end(slot)) +
           "  " + std::to_string(s.histogram[i]) + "\n";
  }
  return out;
}

namespace {

void info(const Logger& log, const std::string& msg) {
  if (log) log(LogLevel::Info, msg);
}

void warn(const Logger& log, const std::string& msg) {
  if (log) log(LogLevel::Warning, msg);
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::string language_reason(const LanguageDecision& d) {
  std::string r = "language " + d.dropped_as + " (";
  bool first = true;
  for (const auto& [lang, frac] : d.fractions) {
    r += (first ? "" : " ") + lang + "=" + io::format_fixed(frac, 3);
    first = false;
  }
  return r + ")";
}

void write_stats(const PipelineConfig& config, const CorpusStats& stats) {
  const auto dir = config.corpus_dir();
  io::write_file(dir / "stats.json", stats_json(stats));
  io::write_file(dir / "slot_histogram.csv", histogram_csv(stats.histogram, stats.slots));
  io::write_file(dir / "slot_histogram.svg",
                 histogram_svg(stats.histogram, stats.slots,
                               std::to_string(stats.slots.slot_width_years) + "-year slots: documents per slot"));
}

IngestSummary run_ingest(const PipelineConfig& config, const Logger& log) {
  TimeSlotConfig span = config.trend_slots;
  IngestResult ingested = ingest_corpus(config.corpus_root, config.manifest, span);
  const LanguageFilterConfig filter =
      load_language_filter(config.stopwords_dir, config.languages, config.language_margin);

  std::vector<PoemRecord> kept;
  std::vector<Rejection> rejections = std::move(ingested.rejections);
  for (auto& poem : ingested.records) {
    Tokens tokens;
    for (const auto& l : poem.lines) {
      for (auto& t : tokenize(l)) tokens.push_back(std::move(t));
    }
    if (tokens.empty()) {
      rejections.push_back({poem.id, "no tokens"});
      continue;
    }
    const LanguageDecision d = detect_language(tokens, filter);
    if (!d.keep) {
      rejections.push_back({poem.id, language_reason(d)});
      continue;
    }
    kept.push_back(std::move(poem));
  }
  if (kept.empty()) fail(ErrorKind::Runtime, "no documents survived ingestion");

  const auto dir = config.corpus_dir();
  ensure_dir(dir);
  write_corpus_store(config.store_path(), kept);
  write_rejections(dir / "rejections.tsv", rejections);
  IngestSummary summary;
  summary.kept = kept.size();
  summary.rejected = rejections.size();
  summary.stats = corpus_stats(kept, config.trend_slots);
  write_stats(config, summary.stats);
  info(log, "ingested " + std::to_string(summary.kept) + " poems, rejected " +
                std::to_string(summary.rejected));
  return summary;
}

TopicModel run_train(const PipelineConfig& config, const Logger& log) {
  const auto corpus = read_corpus_store(config.store_path());
  if (corpus.empty()) fail(ErrorKind::Runtime, "corpus store is empty");
  const StopwordSet stopwords = load_stopwords(config.stopwords_dir / "stopwords.de.txt");

  std::vector<Tokens> docs;
  docs.reserve(corpus.size());
  for (const auto& p : corpus) docs.push_back(topic_tokens(p.lines, stopwords));
  const Vocabulary vocab = build_vocabulary(docs, config.min_doc_freq, config.max_doc_ratio);

  std::vector<BowDocument> bows;
  std::vector<Rejection> excluded;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    BowDocument bow = to_bow(docs[i], vocab, corpus[i].id);
    if (bow.empty()) {
      excluded.push_back({corpus[i].id, "no in-vocabulary tokens after stopword removal"});
      continue;
    }
    bows.push_back(std::move(bow));
  }
  if (bows.empty()) fail(ErrorKind::Runtime, "no documents left for topic training");
  info(log, "training " + std::to_string(config.lda.topics) + " topics on " +
                std::to_string(bows.size()) + " documents, V=" + std::to_string(vocab.size()));

  LdaHyperparams hp = config.lda;
  hp.seed = config.seed;
  TrainObserver observer;
  observer.after_sweep = [&](const GibbsState&, int sweep) {
    if (sweep % 10 == 0 || sweep == hp.sweeps) {
      info(log, "sweep " + std::to_string(sweep) + "/" + std::to_string(hp.sweeps));
    }
  };
  TopicModel model = train_lda(bows, vocab, hp, observer);

  const auto dir = config.model_dir();
  ensure_dir(dir);
  save_model(model, dir);
  write_bow_dump(dir / "bow.tsv", bows);
  write_rejections(dir / "excluded.tsv", excluded);
  std::string topics;
  const std::size_t n = std::min(config.top_words, model.vocab_size());
  for (std::size_t k = 0; k < model.num_topics(); ++k) {
    topics += topic_column_name(k) + ":";
    for (const auto& wp : top_words(model, static_cast<int>(k), n)) {
      topics += " " + wp.word + "(" + io::format_fixed(wp.prob, 4) + ")";
    }
    topics += "\n";
  }
  io::write_file(dir / "topics.txt", topics);
  if (!excluded.empty()) {
    warn(log, std::to_string(excluded.size()) + " documents excluded (see model/excluded.tsv)");
  }
  return model;
}

std::vector<std::filesystem::path> run_trends(const PipelineConfig& config, const Logger& log) {
  const auto corpus = read_corpus_store(config.store_path());
  const TopicModel model = load_model(config.model_dir());
  std::unordered_map<std::string, int> year_of;
  for (const auto& p : corpus) year_of.emplace(p.id, p.year);
  std::vector<int> slots;
  slots.reserve(model.num_docs());
  for (const auto& id : model.doc_ids) {
    auto it = year_of.find(id);
    if (it == year_of.end()) {
      fail(ErrorKind::Runtime, "model document '" + id + "' is not in the corpus store");
    }
    slots.push_back(assign_time_slot(it->second, config.trend_slots));
  }
  const auto series = all_topic_trends(model.theta, slots, config.trend_slots);
  const auto dir = config.trends_dir();
  auto written = emit_trends(series, TrendFormat::Csv, dir);
  auto svgs = emit_trends(series, TrendFormat::Svg, dir);
  written.insert(written.end(), svgs.begin(), svgs.end());
  info(log, "wrote " + std::to_string(written.size()) + " trend files to " + dir.string());
  return written;
}

std::string slot_class_name(const TimeSlotConfig& slots, int s) {
  return std::to_string(slots.slot_start(s)) + "-" + std::to_string(slots.slot_end(s));
}

// Topic mixtures per unit: training theta for poems the model was trained
// on, fold-in inference otherwise. Units without any in-vocabulary token get
// the prior mean (uniform).
ThetaTable unit_thetas(const PipelineConfig& config, const TopicModel& model,
                       std::span<const TextUnit> units, bool poem_units, std::size_t& uninformed) {
  const StopwordSet stopwords = load_stopwords(config.stopwords_dir / "stopwords.de.txt");
  const Vocabulary vocab(model.vocabulary);
  std::unordered_map<std::string, std::size_t> trained;
  if (poem_units) {
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) trained.emplace(model.doc_ids[d], d);
  }
  const std::size_t K = model.num_topics();
  ThetaTable table;
  table.theta = Matrix(units.size(), K);
  uninformed = 0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    table.ids.push_back(units[i].id);
    auto row = table.theta.row(i);
    if (auto it = trained.find(units[i].id); it != trained.end()) {
      const auto src = model.theta.row(it->second);
      std::copy(src.begin(), src.end(), row.begin());
      continue;
    }
    const BowDocument bow = to_bow(topic_tokens(units[i].lines, stopwords), vocab, units[i].id);
    if (bow.empty()) {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(K));
      ++uninformed;
      continue;
    }
    const auto theta =
        infer_document_topics(model, bow, config.infer_sweeps, mix_seed(config.seed, {0x1AF, i}));
    std::copy(theta.begin(), theta.end(), row.begin());
  }
  return table;
}

EvalReport run_classify(const PipelineConfig& config, const Logger& log) {
  const auto corpus = read_corpus_store(config.store_path());
  const bool poems = config.unit == "poem";
  std::vector<TextUnit> units = poems ? poem_units(corpus) : stanza_units(corpus);
  // Units must carry at least one token for the style features.
  std::erase_if(units, [](const TextUnit& u) {
    return std::none_of(u.lines.begin(), u.lines.end(),
                        [](const std::string& l) { return !tokenize(l).empty(); });
  });

  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::string> notes;
  if (config.task == "period") {
    for (const auto& u : units) labels.push_back(assign_time_slot(u.year, config.class_slots));
    for (int s = 0; s < config.class_slots.slot_count(); ++s) {
      class_names.push_back(slot_class_name(config.class_slots, s));
    }
  } else {
    std::vector<std::string> authors;
    for (const auto& u : units) authors.push_back(u.author);
    AuthorSelection sel = filter_top_authors(authors, config.top_authors);
    if (sel.warning) {
      warn(log, *sel.warning);
      notes.push_back(*sel.warning);
    }
    std::vector<TextUnit> kept;
    for (std::size_t i : sel.kept) kept.push_back(std::move(units[i]));
    units = std::move(kept);
    labels = std::move(sel.labels);
    class_names = std::move(sel.authors);
  }
  if (units.size() < 2) fail(ErrorKind::Runtime, "too few units to classify");

  FeatureSelection selection;
  selection.style = config.features != "lda";
  selection.lda = config.features != "style";
  std::optional<ThetaTable> thetas;
  if (selection.lda) {
    const TopicModel model = load_model(config.model_dir());
    std::size_t uninformed = 0;
    thetas = unit_thetas(config, model, units, poems, uninformed);
    if (uninformed) {
      notes.push_back(std::to_string(uninformed) +
                      " units had no in-vocabulary words and use the uniform prior mixture");
    }
  }
  FeatureMatrix fm = assemble_features(units, thetas ? &*thetas : nullptr, selection, labels, class_names);

  const std::uint64_t split_seed = mix_seed(config.seed, {0x5B17});
  TrainTestSplit split;
  if (config.grouped_split) {
    std::vector<std::string> groups;
    for (const auto& u : units) groups.push_back(u.poem_id);
    split = split_train_test_grouped(groups, config.split_ratio, split_seed);
    notes.push_back("split grouped by poem");
  } else {
    split = split_train_test(units.size(), config.split_ratio, split_seed);
  }
  const FeatureMatrix train = select_rows(fm, split.train);
  const FeatureMatrix test = select_rows(fm, split.test);

  const auto grid = config.grid();
  info(log, "grid search over " + std::to_string(grid.size()) + " forest configurations on " +
                std::to_string(train.labels.size()) + " training units");
  const GridSearchResult search =
      grid_search(train, grid, config.grid_train_ratio, mix_seed(config.seed, {0x6C1D}), config.threads);
  const TrainedForest forest = train_forest(train.values, train.labels, train.column_names,
                                            train.class_names, search.best, config.threads);
  EvalReport report = evaluate(forest, test);
  report.task = config.task;
  report.unit = config.unit;
  report.features = config.features;
  report.train_size = train.labels.size();
  report.split_ratio = config.split_ratio;
  report.split_seed = split_seed;
  report.grid = search.scores;
  report.notes = std::move(notes);
  {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (int l : train.labels) ++counts[static_cast<std::size_t>(l)];
    const auto majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const auto hits = std::count(test.labels.begin(), test.labels.end(), majority);
    report.majority_baseline = static_cast<double>(hits) / static_cast<double>(test.labels.size());
  }

  const auto dir = config.classify_dir();
  ensure_dir(dir);
  io::write_file(dir / "report.json", report_json(report));
  io::write_file(dir / "report.txt", report_text(report));
  io::write_file(dir / "confusion.csv", confusion_csv(report));
  io::write_file(dir / "importances.csv", importances_csv(report));
  if (selection.style) {
    std::vector<StyleVector> style;
    std::vector<int> slots;
    for (const auto& u : units) {
      style.push_back(style_features(u));
      slots.push_back(assign_time_slot(u.year, config.class_slots));
    }
    write_feature_dump(dir / "style_features.tsv", units, style, slots);
  }
  info(log, config.task + "/" + config.unit + "/" + config.features + ": accuracy " +
                io::format_fixed(report.accuracy, 4) + " on " + std::to_string(report.test_size) +
                " test units");
  return report;
}

}  // namespace

IngestSummary cmd_ingest(const PipelineConfig& config, const Logger& log) {
  config.validate_for("ingest");
  OutputLock lock(config.output_dir);
  return run_ingest(config, log);
}

CorpusStats cmd_stats(const PipelineConfig& config, const Logger& log) {
  config.validate_for("stats");
  OutputLock lock(config.output_dir);
  const auto corpus = read_corpus_store(config.store_path());
  CorpusStats stats = corpus_stats(corpus, config.trend_slots);
  write_stats(config, stats);
  info(log, stats_text(stats));
  return stats;
}

TopicModel cmd_train(const PipelineConfig& config, const Logger& log) {
  config.validate_for("train");
  OutputLock lock(config.output_dir);
  return run_train(config, log);
}

std::vector<std::filesystem::path> cmd_trends(const PipelineConfig& config, const Logger& log) {
  config.validate_for("trends");
  OutputLock lock(config.output_dir);
  return run_trends(config, log);
}

EvalReport cmd_classify(const PipelineConfig& config, const Logger& log) {
  config.validate_for("classify");
  OutputLock lock(config.output_dir);
  return run_classify(config, log);
}

std::string cmd_reproduce_paper(const PipelineConfig& base, const Logger& log) {
  PipelineConfig config = base;
  config.lda.topics = 100;
  config.lda.alpha.reset();
  config.lda.sweeps = 50;
  config.lda.burn_in = std::min(config.lda.burn_in, 49);
  config.trend_slots.slot_width_years = 25;
  config.class_slots.slot_width_years = 50;
  config.split_ratio = 0.7;
  config.top_authors = 180;
  config.validate_for("reproduce-paper");
  OutputLock lock(config.output_dir);

  const IngestSummary ingest = run_ingest(config, log);
  run_train(config, log);
  run_trends(config, log);

  struct Experiment {
    std::string task, unit, features, reference;
  };
  const std::vector<Experiment> experiments = {
      {"period", "stanza", "style", "0.83"},  {"period", "stanza", "lda", "0.89"},
      {"period", "stanza", "combined", "0.90"}, {"period", "poem", "combined", "0.42-0.52"},
      {"author", "stanza", "combined", "0.71"}, {"author", "poem", "combined", "0.13"},
  };

  std::string table;
  table += "Reference values come from the original 51k-poem TextGrid study and are shown for\n";
  table += "orientation only; they are not expected to match on a different corpus.\n\n";
  table += "corpus                       obtained     reference\n";
  auto row = [&](std::string label, std::string obtained, std::string reference) {
    label.resize(29, ' ');
    obtained.resize(13, ' ');
    table += label + obtained + reference + "\n";
  };
  const auto& st = ingest.stats;
  row("documents", std::to_string(st.documents), "~51000");
  row("tokens", std::to_string(st.tokens), "~8000000");
  row("authors", std::to_string(st.authors), "229");
  row("poems per author (mean)", io::format_fixed(st.poems_per_author_mean, 1), "240");
  row("poems per author (median)", io::format_fixed(st.poems_per_author_median, 1), "131");
  table += "\nclassification accuracy      obtained     reference\n";

  nlohmann::ordered_json summary;
  summary["reference_only"] = true;
  summary["corpus"] = nlohmann::json::parse(stats_json(st));
  auto& results = summary["classification"] = nlohmann::ordered_json::array();
  for (const auto& e : experiments) {
    PipelineConfig c = config;
    c.task = e.task;
    c.unit = e.unit;
    c.features = e.features;
    std::string obtained;
    try {
      const EvalReport r = run_classify(c, log);
      obtained = io::format_fixed(r.accuracy, 4);
    } catch (const Error& err) {
      warn(log, e.task + "/" + e.unit + "/" + e.features + " failed: " + err.what());
      obtained = "n/a";
    }
    row(e.task + " " + e.unit + " " + e.features, obtained, e.reference);
    results.push_back({{"task", e.task}, {"unit", e.unit}, {"features", e.features},
                       {"accuracy", obtained}, {"reference", e.reference}});
  }
  const auto dir = config.output_dir / "reproduce";
  ensure_dir(dir);
  io::write_file(dir / "summary.txt", table);
  io::write_file(dir / "summary.json", summary.dump(2) + "\n");
  return table;
}

}  // namespace poetopics

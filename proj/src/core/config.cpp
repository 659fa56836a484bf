#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>

#include <toml.hpp>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace poetopics {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  fail(ErrorKind::Validation, "config key '" + std::string(key) + "': expected " +
                                  std::string(want) + ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  text = io::trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    bad_value(key, text, "a number");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = io::trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(key, text, "true or false");
}

std::vector<std::string> parse_list(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& item : io::split(text, ',')) {
    const auto t = io::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

template <typename T>
std::vector<T> parse_number_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  for (const auto& item : parse_list(text)) out.push_back(parse_number<T>(key, item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + std::to_string(items[i]);
  return out;
}

struct KeyHandler {
  std::function<void(PipelineConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const PipelineConfig&)> get;
  bool is_path = false;
};

std::string one_of(std::string_view key, std::string_view value,
                   std::initializer_list<std::string_view> allowed) {
  const auto v = io::trim(value);
  for (auto a : allowed) {
    if (v == a) return std::string(v);
  }
  std::string want;
  for (auto a : allowed) want += (want.empty() ? "" : "|") + std::string(a);
  bad_value(key, value, want);
}

const std::map<std::string, KeyHandler, std::less<>>& handlers() {
  using C = PipelineConfig;
  using SV = std::string_view;
  static const std::map<std::string, KeyHandler, std::less<>> table = {
      {"paths.corpus_root",
       {[](C& c, SV, SV v) { c.corpus_root = std::string(v); }, [](const C& c) { return c.corpus_root.string(); }, true}},
      {"paths.manifest",
       {[](C& c, SV, SV v) { c.manifest = std::string(v); }, [](const C& c) { return c.manifest.string(); }, true}},
      {"paths.stopwords_dir",
       {[](C& c, SV, SV v) { c.stopwords_dir = std::string(v); }, [](const C& c) { return c.stopwords_dir.string(); }, true}},
      {"paths.output_dir",
       {[](C& c, SV, SV v) { c.output_dir = std::string(v); }, [](const C& c) { return c.output_dir.string(); }, true}},
      {"corpus.origin_year",
       {[](C& c, SV k, SV v) { c.trend_slots.origin_year = c.class_slots.origin_year = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.trend_slots.origin_year); }}},
      {"corpus.end_year",
       {[](C& c, SV k, SV v) { c.trend_slots.end_year = c.class_slots.end_year = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.trend_slots.end_year); }}},
      {"corpus.languages",
       {[](C& c, SV, SV v) { c.languages = parse_list(v); }, [](const C& c) { return join(c.languages); }}},
      {"corpus.language_margin",
       {[](C& c, SV k, SV v) { c.language_margin = parse_number<double>(k, v); },
        [](const C& c) { return io::format_double(c.language_margin); }}},
      {"textproc.min_doc_freq",
       {[](C& c, SV k, SV v) { c.min_doc_freq = parse_number<std::uint32_t>(k, v); },
        [](const C& c) { return std::to_string(c.min_doc_freq); }}},
      {"textproc.max_doc_ratio",
       {[](C& c, SV k, SV v) { c.max_doc_ratio = parse_number<double>(k, v); },
        [](const C& c) { return io::format_double(c.max_doc_ratio); }}},
      {"lda.topics",
       {[](C& c, SV k, SV v) { c.lda.topics = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.lda.topics); }}},
      {"lda.alpha",
       {[](C& c, SV k, SV v) {
          if (io::trim(v) == "auto") c.lda.alpha.reset();
          else c.lda.alpha = parse_number<double>(k, v);
        },
        [](const C& c) { return c.lda.alpha ? io::format_double(*c.lda.alpha) : std::string("auto"); }}},
      {"lda.beta",
       {[](C& c, SV k, SV v) { c.lda.beta = parse_number<double>(k, v); },
        [](const C& c) { return io::format_double(c.lda.beta); }}},
      {"lda.sweeps",
       {[](C& c, SV k, SV v) { c.lda.sweeps = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.lda.sweeps); }}},
      {"lda.burn_in",
       {[](C& c, SV k, SV v) { c.lda.burn_in = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.lda.burn_in); }}},
      {"lda.infer_sweeps",
       {[](C& c, SV k, SV v) { c.infer_sweeps = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.infer_sweeps); }}},
      {"lda.top_words",
       {[](C& c, SV k, SV v) { c.top_words = parse_number<std::size_t>(k, v); },
        [](const C& c) { return std::to_string(c.top_words); }}},
      {"trends.slot_width",
       {[](C& c, SV k, SV v) { c.trend_slots.slot_width_years = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.trend_slots.slot_width_years); }}},
      {"classify.slot_width",
       {[](C& c, SV k, SV v) { c.class_slots.slot_width_years = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.class_slots.slot_width_years); }}},
      {"classify.task",
       {[](C& c, SV k, SV v) { c.task = one_of(k, v, {"period", "author"}); },
        [](const C& c) { return c.task; }}},
      {"classify.unit",
       {[](C& c, SV k, SV v) { c.unit = one_of(k, v, {"stanza", "poem"}); },
        [](const C& c) { return c.unit; }}},
      {"classify.features",
       {[](C& c, SV k, SV v) { c.features = one_of(k, v, {"style", "lda", "combined"}); },
        [](const C& c) { return c.features; }}},
      {"classify.split_ratio",
       {[](C& c, SV k, SV v) { c.split_ratio = parse_number<double>(k, v); },
        [](const C& c) { return io::format_double(c.split_ratio); }}},
      {"classify.grid_train_ratio",
       {[](C& c, SV k, SV v) { c.grid_train_ratio = parse_number<double>(k, v); },
        [](const C& c) { return io::format_double(c.grid_train_ratio); }}},
      {"classify.top_authors",
       {[](C& c, SV k, SV v) { c.top_authors = parse_number<std::size_t>(k, v); },
        [](const C& c) { return std::to_string(c.top_authors); }}},
      {"classify.grouped_split",
       {[](C& c, SV k, SV v) { c.grouped_split = parse_bool(k, v); },
        [](const C& c) { return std::string(c.grouped_split ? "true" : "false"); }}},
      {"classify.threads",
       {[](C& c, SV k, SV v) { c.threads = parse_number<unsigned>(k, v); },
        [](const C& c) { return std::to_string(c.threads); }}},
      {"classify.grid.n_trees",
       {[](C& c, SV k, SV v) { c.grid_n_trees = parse_number_list<int>(k, v); },
        [](const C& c) { return join_numbers(c.grid_n_trees); }}},
      {"classify.grid.max_depth",
       {[](C& c, SV k, SV v) {
          c.grid_max_depth.clear();
          for (const auto& item : parse_list(v)) {
            c.grid_max_depth.push_back(item == "none" ? 0 : parse_number<int>(k, item));
          }
        },
        [](const C& c) {
          std::vector<std::string> items;
          for (int d : c.grid_max_depth) items.push_back(d > 0 ? std::to_string(d) : "none");
          return join(items);
        }}},
      {"classify.grid.max_features",
       {[](C& c, SV, SV v) { c.grid_max_features = parse_list(v); },
        [](const C& c) { return join(c.grid_max_features); }}},
      {"classify.grid.impurity",
       {[](C& c, SV, SV v) { c.grid_impurity = parse_list(v); },
        [](const C& c) { return join(c.grid_impurity); }}},
      {"classify.grid.min_samples_split",
       {[](C& c, SV k, SV v) { c.grid_min_samples_split = parse_number<int>(k, v); },
        [](const C& c) { return std::to_string(c.grid_min_samples_split); }}},
      {"classify.grid.bootstrap",
       {[](C& c, SV k, SV v) { c.grid_bootstrap = parse_bool(k, v); },
        [](const C& c) { return std::string(c.grid_bootstrap ? "true" : "false"); }}},
      {"seed",
       {[](C& c, SV k, SV v) {
          c.seed = parse_number<std::uint64_t>(k, v);
          c.lda.seed = c.seed;
        },
        [](const C& c) { return std::to_string(c.seed); }}},
  };
  return table;
}

const KeyHandler& handler(std::string_view key) {
  const auto& table = handlers();
  auto it = table.find(key);
  if (it == table.end()) fail(ErrorKind::Validation, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

std::string toml_leaf_text(const toml::node& node, std::string_view key) {
  if (auto s = node.value<std::string>()) return *s;
  if (node.is_integer()) return std::to_string(*node.value<std::int64_t>());
  if (node.is_floating_point()) return io::format_double(*node.value<double>());
  if (node.is_boolean()) return *node.value<bool>() ? "true" : "false";
  if (auto arr = node.as_array()) {
    std::string out;
    for (const auto& item : *arr) {
      if (!out.empty()) out += ',';
      out += toml_leaf_text(item, key);
    }
    return out;
  }
  fail(ErrorKind::Validation, "config key '" + std::string(key) + "' has an unsupported TOML type");
}

void walk(PipelineConfig& config, const toml::table& table, const std::string& prefix,
          const std::filesystem::path& base) {
  for (const auto& [k, node] : table) {
    const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
    if (auto sub = node.as_table()) {
      walk(config, *sub, key, base);
      continue;
    }
    std::string value = toml_leaf_text(node, key);
    if (handler(key).is_path && std::filesystem::path(value).is_relative()) {
      value = (base / value).lexically_normal().string();
    }
    config.set(key, value);
  }
}

void require_dir(const std::filesystem::path& p, std::string_view what) {
  if (p.empty()) fail(ErrorKind::Validation, std::string(what) + " is not set");
  if (!std::filesystem::is_directory(p)) {
    fail(ErrorKind::Validation, std::string(what) + " does not exist: " + p.string());
  }
}

void require_file(const std::filesystem::path& p, std::string_view what, std::string_view hint = {}) {
  if (p.empty()) fail(ErrorKind::Validation, std::string(what) + " is not set");
  if (!std::filesystem::is_regular_file(p)) {
    std::string msg = std::string(what) + " not found: " + p.string();
    if (!hint.empty()) msg += " (" + std::string(hint) + ")";
    fail(ErrorKind::Validation, msg);
  }
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
  handler(key).set(*this, key, value);
}

std::string PipelineConfig::get(std::string_view key) const { return handler(key).get(*this); }

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : handlers()) out.push_back(k);
    return out;
  }();
  return names;
}

void PipelineConfig::load_toml(const std::filesystem::path& path) {
  toml::table table;
  try {
    table = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    fail(ErrorKind::Validation, "config " + path.string() + ": " + std::string(e.description()));
  }
  walk(*this, table, "", path.parent_path());
}

std::vector<ForestConfig> PipelineConfig::grid() const {
  std::vector<ForestConfig> grid;
  const std::uint64_t forest_seed = mix_seed(seed, {0xF0});
  for (int trees : grid_n_trees) {
    for (int depth : grid_max_depth) {
      for (const auto& mf : grid_max_features) {
        for (const auto& imp : grid_impurity) {
          ForestConfig c;
          c.n_trees = trees;
          if (depth > 0) c.max_depth = depth;
          c.max_features = parse_max_features(mf);
          c.impurity = parse_impurity(imp);
          c.min_samples_split = grid_min_samples_split;
          c.bootstrap = grid_bootstrap;
          c.seed = forest_seed;
          c.validate();
          grid.push_back(c);
        }
      }
    }
  }
  if (grid.empty()) fail(ErrorKind::Validation, "the forest grid is empty");
  return grid;
}

void PipelineConfig::validate_for(std::string_view command) const {
  if (output_dir.empty()) fail(ErrorKind::Validation, "output directory is not set");
  trend_slots.validate();
  class_slots.validate();
  const bool ingest = command == "ingest" || command == "reproduce-paper";
  if (ingest) {
    require_dir(corpus_root, "corpus root");
    require_file(manifest, "manifest");
    require_dir(stopwords_dir, "stopword directory");
    if (languages.empty() || std::find(languages.begin(), languages.end(), "de") == languages.end()) {
      fail(ErrorKind::Validation, "language list must include 'de'");
    }
    for (const auto& lang : languages) {
      require_file(stopwords_dir / ("stopwords." + lang + ".txt"), "stopword list");
    }
    if (!(language_margin >= 0.0)) fail(ErrorKind::Validation, "language margin must be >= 0");
  }
  const std::string ingest_hint = "run `ingest` first";
  if (command == "train" || command == "reproduce-paper") {
    if (!ingest) require_file(store_path(), "corpus store", ingest_hint);
    require_file(stopwords_dir / "stopwords.de.txt", "German stopword list");
    lda.validate();
    if (min_doc_freq < 1) fail(ErrorKind::Validation, "min_doc_freq must be >= 1");
    if (!(max_doc_ratio > 0.0 && max_doc_ratio <= 1.0)) {
      fail(ErrorKind::Validation, "max_doc_ratio must be in (0, 1]");
    }
    if (top_words < 1) fail(ErrorKind::Validation, "top_words must be >= 1");
  }
  if (command == "trends") {
    require_file(store_path(), "corpus store", ingest_hint);
    require_file(model_dir() / "model.meta.json", "topic model", "run `train` first");
  }
  if (command == "stats") require_file(store_path(), "corpus store", ingest_hint);
  if (command == "classify" || command == "reproduce-paper") {
    if (command == "classify") {
      require_file(store_path(), "corpus store", ingest_hint);
      if (features != "style") {
        require_file(model_dir() / "model.meta.json", "topic model", "run `train` first");
        require_file(stopwords_dir / "stopwords.de.txt", "German stopword list");
      }
    }
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) fail(ErrorKind::Validation, "split ratio must be in (0, 1)");
    if (!(grid_train_ratio > 0.0 && grid_train_ratio < 1.0)) {
      fail(ErrorKind::Validation, "grid train ratio must be in (0, 1)");
    }
    if (infer_sweeps < 1) fail(ErrorKind::Validation, "infer_sweeps must be >= 1");
    if (top_authors < 2) fail(ErrorKind::Validation, "top_authors must be >= 2");
    (void)grid();
  }
}

}  // namespace poetopics

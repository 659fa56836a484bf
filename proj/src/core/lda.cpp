#include "lda.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace poetopics {

void LdaHyperparams::validate() const {
  if (topics < 1) fail(ErrorKind::Validation, "lda: topic count must be >= 1");
  if (alpha && !(*alpha > 0.0)) fail(ErrorKind::Validation, "lda: alpha must be > 0");
  if (!(beta > 0.0)) fail(ErrorKind::Validation, "lda: beta must be > 0");
  if (sweeps < 1) fail(ErrorKind::Validation, "lda: sweeps must be >= 1");
  if (burn_in < 0 || burn_in >= sweeps) {
    fail(ErrorKind::Validation, "lda: burn_in must be in [0, sweeps)");
  }
}

std::string GibbsState::check_invariants() const {
  std::uint64_t sum_nk = 0;
  for (std::size_t k = 0; k < num_topics; ++k) {
    std::uint64_t row = 0;
    for (std::size_t w = 0; w < vocab_size; ++w) row += n_kw[k * vocab_size + w];
    if (row != n_k[k]) return "topic " + std::to_string(k) + ": sum_w n_kw != n_k";
    sum_nk += n_k[k];
  }
  if (sum_nk != total_tokens()) return "sum_k n_k != total tokens";
  for (std::size_t d = 0; d < num_docs; ++d) {
    std::uint64_t row = 0;
    for (std::size_t k = 0; k < num_topics; ++k) row += n_dk[d * num_topics + k];
    if (row != doc_offset[d + 1] - doc_offset[d]) {
      return "doc " + std::to_string(d) + ": sum_k n_dk != N_d";
    }
  }
  return {};
}

GibbsState init_gibbs_state(std::span<const BowDocument> bows, std::size_t vocab_size,
                            const LdaHyperparams& hp) {
  hp.validate();
  if (bows.empty()) fail(ErrorKind::Runtime, "lda: empty corpus");
  if (vocab_size == 0) fail(ErrorKind::Runtime, "lda: empty vocabulary");
  GibbsState s;
  s.num_docs = bows.size();
  s.num_topics = static_cast<std::size_t>(hp.topics);
  s.vocab_size = vocab_size;
  s.doc_offset.reserve(bows.size() + 1);
  s.doc_offset.push_back(0);
  for (const auto& bow : bows) {
    if (bow.empty()) fail(ErrorKind::Runtime, "lda: document '" + bow.doc_id + "' is empty");
    for (const auto& e : bow.entries) {
      if (e.word >= vocab_size) {
        fail(ErrorKind::Runtime, "lda: document '" + bow.doc_id + "' has a word id outside the vocabulary");
      }
      s.words.insert(s.words.end(), e.count, e.word);
    }
    s.doc_offset.push_back(s.words.size());
  }
  s.z.resize(s.words.size());
  s.n_dk.assign(s.num_docs * s.num_topics, 0);
  s.n_kw.assign(s.num_topics * s.vocab_size, 0);
  s.n_k.assign(s.num_topics, 0);
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    SplitMix64 rng(mix_seed(hp.seed, {0, d}));
    for (std::uint64_t i = s.doc_offset[d]; i < s.doc_offset[d + 1]; ++i) {
      const auto k = static_cast<std::uint32_t>(rng.below(s.num_topics));
      s.z[i] = k;
      ++s.n_dk[d * s.num_topics + k];
      ++s.n_kw[k * s.vocab_size + s.words[i]];
      ++s.n_k[k];
    }
  }
  return s;
}

void token_conditional(const GibbsState& s, const LdaHyperparams& hp, std::size_t doc,
                       std::uint32_t word, std::span<double> out) {
  const double alpha = hp.alpha_value();
  const double vbeta = static_cast<double>(s.vocab_size) * hp.beta;
  double total = 0.0;
  for (std::size_t k = 0; k < s.num_topics; ++k) {
    const double p = (s.n_dk[doc * s.num_topics + k] + alpha) *
                     (s.n_kw[k * s.vocab_size + word] + hp.beta) /
                     (static_cast<double>(s.n_k[k]) + vbeta);
    out[k] = p;
    total += p;
  }
  for (auto& p : out) p /= total;
}

void gibbs_sweep(GibbsState& s, const LdaHyperparams& hp, int sweep) {
  const std::size_t K = s.num_topics;
  const std::size_t V = s.vocab_size;
  const double alpha = hp.alpha_value();
  const double beta = hp.beta;
  const double vbeta = static_cast<double>(V) * beta;
  std::vector<double> cumulative(K);
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    SplitMix64 rng(mix_seed(hp.seed, {static_cast<std::uint64_t>(sweep), d}));
    std::uint32_t* ndk = s.n_dk.data() + d * K;
    for (std::uint64_t i = s.doc_offset[d]; i < s.doc_offset[d + 1]; ++i) {
      const std::uint32_t w = s.words[i];
      std::uint32_t k = s.z[i];
      --ndk[k];
      --s.n_kw[k * V + w];
      --s.n_k[k];

      double sum = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        sum += (ndk[t] + alpha) * (s.n_kw[t * V + w] + beta) /
               (static_cast<double>(s.n_k[t]) + vbeta);
        cumulative[t] = sum;
      }
      const double u = rng.uniform() * sum;
      std::size_t pick = 0;
      while (pick + 1 < K && cumulative[pick] <= u) ++pick;
      k = static_cast<std::uint32_t>(pick);

      s.z[i] = k;
      ++ndk[k];
      ++s.n_kw[k * V + w];
      ++s.n_k[k];
    }
  }
}

Matrix estimate_phi(const GibbsState& s, const LdaHyperparams& hp) {
  Matrix phi(s.num_topics, s.vocab_size);
  const double vbeta = static_cast<double>(s.vocab_size) * hp.beta;
  for (std::size_t k = 0; k < s.num_topics; ++k) {
    const double denom = static_cast<double>(s.n_k[k]) + vbeta;
    for (std::size_t w = 0; w < s.vocab_size; ++w) {
      phi(k, w) = (s.n_kw[k * s.vocab_size + w] + hp.beta) / denom;
    }
  }
  return phi;
}

Matrix estimate_theta(const GibbsState& s, const LdaHyperparams& hp) {
  Matrix theta(s.num_docs, s.num_topics);
  const double alpha = hp.alpha_value();
  const double kalpha = static_cast<double>(s.num_topics) * alpha;
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    const double denom = static_cast<double>(s.doc_offset[d + 1] - s.doc_offset[d]) + kalpha;
    for (std::size_t k = 0; k < s.num_topics; ++k) {
      theta(d, k) = (s.n_dk[d * s.num_topics + k] + alpha) / denom;
    }
  }
  return theta;
}

namespace {

double log_likelihood(const GibbsState& s, const LdaHyperparams& hp) {
  const double V = static_cast<double>(s.vocab_size);
  const double lg_beta = std::lgamma(hp.beta);
  double ll = static_cast<double>(s.num_topics) * (std::lgamma(V * hp.beta) - V * lg_beta);
  for (std::size_t k = 0; k < s.num_topics; ++k) {
    for (std::size_t w = 0; w < s.vocab_size; ++w) {
      const std::uint32_t n = s.n_kw[k * s.vocab_size + w];
      if (n) ll += std::lgamma(n + hp.beta) - lg_beta;
    }
    ll -= std::lgamma(static_cast<double>(s.n_k[k]) + V * hp.beta);
  }
  return ll;
}

void accumulate(Matrix& acc, const Matrix& m) {
  auto& a = acc.data();
  const auto& b = m.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void scale(Matrix& m, double factor) {
  for (auto& x : m.data()) x *= factor;
}

std::vector<std::uint32_t> expand_tokens(const BowDocument& bow, std::size_t vocab_size) {
  std::vector<std::uint32_t> tokens;
  for (const auto& e : bow.entries) {
    if (e.word < vocab_size) tokens.insert(tokens.end(), e.count, e.word);
  }
  return tokens;
}

}  // namespace

std::uint64_t TopicModel::vocab_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : vocabulary) {
    h = io::fnv1a64(w, h);
    h = io::fnv1a64("\n", h);
  }
  return h;
}

TopicModel train_lda(std::span<const BowDocument> bows, const Vocabulary& vocab,
                     const LdaHyperparams& hp, const TrainObserver& observer) {
  GibbsState state = init_gibbs_state(bows, vocab.size(), hp);

  TopicModel model;
  model.hyperparams = hp;
  model.vocabulary = vocab.words();
  model.doc_ids.reserve(bows.size());
  for (const auto& b : bows) model.doc_ids.push_back(b.doc_id);
  model.phi = Matrix(state.num_topics, state.vocab_size);
  model.theta = Matrix(state.num_docs, state.num_topics);

  int samples = 0;
  for (int sweep = 1; sweep <= hp.sweeps; ++sweep) {
    gibbs_sweep(state, hp, sweep);
    if (observer.after_sweep) observer.after_sweep(state, sweep);

    const Matrix phi = estimate_phi(state, hp);
    const Matrix theta = estimate_theta(state, hp);
    model.training_log.push_back({sweep, log_likelihood(state, hp), perplexity(phi, bows, theta)});
    if (sweep > hp.burn_in) {
      accumulate(model.phi, phi);
      accumulate(model.theta, theta);
      ++samples;
    }
  }
  scale(model.phi, 1.0 / samples);
  scale(model.theta, 1.0 / samples);
  return model;
}

std::vector<double> infer_document_topics(const TopicModel& model, const BowDocument& bow,
                                          int sweeps, std::uint64_t seed) {
  if (sweeps < 1) fail(ErrorKind::Validation, "inference sweeps must be >= 1");
  if (bow.empty()) fail(ErrorKind::Runtime, "cannot infer topics for empty document '" + bow.doc_id + "'");
  const std::size_t K = model.num_topics();
  const std::vector<std::uint32_t> tokens = expand_tokens(bow, model.vocab_size());
  if (tokens.empty()) {
    fail(ErrorKind::Runtime, "document '" + bow.doc_id + "' has no in-vocabulary words");
  }
  const double alpha = model.hyperparams.alpha_value();
  SplitMix64 rng(seed);
  std::vector<std::uint32_t> z(tokens.size());
  std::vector<std::uint32_t> ndk(K, 0);
  for (auto& k : z) {
    k = static_cast<std::uint32_t>(rng.below(K));
    ++ndk[k];
  }
  const int burn_in = sweeps / 2;
  const double denom = static_cast<double>(tokens.size()) + static_cast<double>(K) * alpha;
  std::vector<double> theta(K, 0.0);
  std::vector<double> cumulative(K);
  int samples = 0;
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      --ndk[z[i]];
      double sum = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        sum += (ndk[t] + alpha) * model.phi(t, tokens[i]);
        cumulative[t] = sum;
      }
      const double u = rng.uniform() * sum;
      std::size_t pick = 0;
      while (pick + 1 < K && cumulative[pick] <= u) ++pick;
      z[i] = static_cast<std::uint32_t>(pick);
      ++ndk[pick];
    }
    if (sweep > burn_in) {
      for (std::size_t t = 0; t < K; ++t) theta[t] += (ndk[t] + alpha) / denom;
      ++samples;
    }
  }
  for (auto& x : theta) x /= samples;
  return theta;
}

std::vector<WordProb> top_words(const TopicModel& model, int topic, std::size_t n) {
  if (topic < 0 || static_cast<std::size_t>(topic) >= model.num_topics()) {
    fail(ErrorKind::Validation, "topic index " + std::to_string(topic) + " out of range [0, " +
                                    std::to_string(model.num_topics()) + ")");
  }
  if (n < 1 || n > model.vocab_size()) {
    fail(ErrorKind::Validation, "top-words count must be in [1, V]");
  }
  const auto row = model.phi.row(static_cast<std::size_t>(topic));
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return model.vocabulary[a] < model.vocabulary[b];
                    });
  std::vector<WordProb> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({model.vocabulary[order[i]], row[order[i]]});
  return out;
}

double perplexity(const Matrix& phi, std::span<const BowDocument> bows, const Matrix& theta) {
  if (bows.empty()) fail(ErrorKind::Runtime, "perplexity: no documents");
  if (theta.rows() != bows.size() || theta.cols() != phi.rows()) {
    fail(ErrorKind::Validation, "perplexity: theta does not match documents/topics");
  }
  double log_sum = 0.0;
  std::uint64_t n = 0;
  for (std::size_t d = 0; d < bows.size(); ++d) {
    const auto th = theta.row(d);
    for (const auto& e : bows[d].entries) {
      if (e.word >= phi.cols()) continue;
      double p = 0.0;
      for (std::size_t k = 0; k < phi.rows(); ++k) p += th[k] * phi(k, e.word);
      log_sum += e.count * std::log(p);
      n += e.count;
    }
  }
  if (n == 0) fail(ErrorKind::Runtime, "perplexity: no in-vocabulary tokens");
  return std::exp(-log_sum / static_cast<double>(n));
}

double heldout_perplexity(const TopicModel& model, std::span<const BowDocument> bows, int sweeps,
                          std::uint64_t seed) {
  Matrix theta(bows.size(), model.num_topics());
  for (std::size_t d = 0; d < bows.size(); ++d) {
    const auto row = infer_document_topics(model, bows[d], sweeps, mix_seed(seed, {d}));
    std::copy(row.begin(), row.end(), theta.row(d).begin());
  }
  return perplexity(model.phi, bows, theta);
}

void write_matrix_f64le(const std::filesystem::path& path, const Matrix& m) {
  std::string bytes;
  bytes.resize(m.data().size() * 8);
  std::size_t pos = 0;
  for (double x : m.data()) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) {
      bytes[pos++] = static_cast<char>(bits & 0xFF);
      bits >>= 8;
    }
  }
  io::write_file(path, bytes);
}

Matrix read_matrix_f64le(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  const std::string bytes = io::read_file(path);
  if (bytes.size() != rows * cols * 8) {
    fail(ErrorKind::Format, path.string() + ": expected " + std::to_string(rows * cols * 8) +
                                " bytes, found " + std::to_string(bytes.size()));
  }
  Matrix m(rows, cols);
  std::size_t pos = 0;
  for (double& x : m.data()) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + b])) << (8 * b);
    }
    pos += 8;
    x = std::bit_cast<double>(bits);
  }
  return m;
}

namespace {

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    out += s;
    out += '\n';
  }
  return out;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  return io::fnv1a64(io::read_file(path));
}

}  // namespace

void save_model(const TopicModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_f64le(dir / "phi.f64le", model.phi);
  write_matrix_f64le(dir / "theta.f64le", model.theta);
  io::write_file(dir / "vocab.txt", join_lines(model.vocabulary));
  io::write_file(dir / "docs.txt", join_lines(model.doc_ids));

  std::string log = "sweep,log_likelihood,perplexity\n";
  for (const auto& s : model.training_log) {
    log += std::to_string(s.sweep) + "," + io::format_double(s.log_likelihood) + "," +
           io::format_double(s.perplexity) + "\n";
  }
  io::write_file(dir / "training_log.csv", log);

  const auto& hp = model.hyperparams;
  nlohmann::ordered_json meta;
  meta["format_version"] = kModelFormatVersion;
  meta["topics"] = model.num_topics();
  meta["vocab_size"] = model.vocab_size();
  meta["documents"] = model.num_docs();
  meta["alpha"] = hp.alpha ? nlohmann::ordered_json(*hp.alpha) : nlohmann::ordered_json(nullptr);
  meta["beta"] = hp.beta;
  meta["sweeps"] = hp.sweeps;
  meta["burn_in"] = hp.burn_in;
  meta["seed"] = std::to_string(hp.seed);
  meta["vocab_hash"] = io::hex64(model.vocab_hash());
  meta["phi_checksum"] = io::hex64(file_checksum(dir / "phi.f64le"));
  meta["theta_checksum"] = io::hex64(file_checksum(dir / "theta.f64le"));
  io::write_file(dir / "model.meta.json", meta.dump(2) + "\n");
}

TopicModel load_model(const std::filesystem::path& dir) {
  const auto meta_path = dir / "model.meta.json";
  if (!std::filesystem::exists(meta_path)) {
    fail(ErrorKind::Io, "no model at " + dir.string() + " (missing model.meta.json; run `train` first)");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, meta_path.string() + ": " + e.what());
  }
  TopicModel model;
  std::size_t K = 0, V = 0, D = 0;
  std::string vocab_hash, phi_sum, theta_sum;
  try {
    const int version = meta.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorKind::Format, "model format version " + std::to_string(version) +
                                  " is not supported (expected " +
                                  std::to_string(kModelFormatVersion) + ")");
    }
    K = meta.at("topics").get<std::size_t>();
    V = meta.at("vocab_size").get<std::size_t>();
    D = meta.at("documents").get<std::size_t>();
    auto& hp = model.hyperparams;
    hp.topics = static_cast<int>(K);
    if (!meta.at("alpha").is_null()) hp.alpha = meta.at("alpha").get<double>();
    hp.beta = meta.at("beta").get<double>();
    hp.sweeps = meta.at("sweeps").get<int>();
    hp.burn_in = meta.at("burn_in").get<int>();
    hp.seed = std::stoull(meta.at("seed").get<std::string>());
    vocab_hash = meta.at("vocab_hash").get<std::string>();
    phi_sum = meta.at("phi_checksum").get<std::string>();
    theta_sum = meta.at("theta_checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, meta_path.string() + ": " + e.what());
  } catch (const std::logic_error&) {
    fail(ErrorKind::Format, meta_path.string() + ": bad seed");
  }

  model.vocabulary = io::split_lines(io::read_file(dir / "vocab.txt"));
  if (model.vocabulary.size() != V) {
    fail(ErrorKind::Format, "vocab.txt has " + std::to_string(model.vocabulary.size()) +
                                " words, model expects " + std::to_string(V));
  }
  if (io::hex64(model.vocab_hash()) != vocab_hash) {
    fail(ErrorKind::Format, "vocabulary hash mismatch in " + dir.string());
  }
  model.doc_ids = io::split_lines(io::read_file(dir / "docs.txt"));
  if (model.doc_ids.size() != D) fail(ErrorKind::Format, "docs.txt does not match document count");

  if (io::hex64(file_checksum(dir / "phi.f64le")) != phi_sum) {
    fail(ErrorKind::Format, "checksum mismatch for phi.f64le");
  }
  if (io::hex64(file_checksum(dir / "theta.f64le")) != theta_sum) {
    fail(ErrorKind::Format, "checksum mismatch for theta.f64le");
  }
  model.phi = read_matrix_f64le(dir / "phi.f64le", K, V);
  model.theta = read_matrix_f64le(dir / "theta.f64le", D, K);

  const auto log_path = dir / "training_log.csv";
  if (std::filesystem::exists(log_path)) {
    const auto lines = io::split_lines(io::read_file(log_path));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto cols = io::split(lines[i], ',');
      if (cols.size() != 3) continue;
      model.training_log.push_back({std::stoi(cols[0]), std::stod(cols[1]), std::stod(cols[2])});
    }
  }
  return model;
}

}  // namespace poetopics

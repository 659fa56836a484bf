#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "textproc.hpp"

namespace poetopics {

struct LdaHyperparams {
  int topics = 100;
  std::optional<double> alpha;  // symmetric; defaults to 1/topics
  double beta = 0.01;
  int sweeps = 50;
  int burn_in = 40;
  std::uint64_t seed = 1;

  double alpha_value() const { return alpha.value_or(1.0 / topics); }
  void validate() const;
};

/// Collapsed Gibbs sampler state. Tokens of document d occupy
/// z[doc_offset[d] .. doc_offset[d+1]), expanded from the BoW entries in
/// word-index order.
struct GibbsState {
  std::size_t num_docs = 0;
  std::size_t num_topics = 0;
  std::size_t vocab_size = 0;
  std::vector<std::uint64_t> doc_offset;
  std::vector<std::uint32_t> words;   // word id per token
  std::vector<std::uint32_t> z;       // topic per token
  std::vector<std::uint32_t> n_dk;    // num_docs x num_topics
  std::vector<std::uint32_t> n_kw;    // num_topics x vocab_size
  std::vector<std::uint64_t> n_k;     // num_topics

  std::uint64_t total_tokens() const noexcept { return words.size(); }
  std::uint32_t doc_topic(std::size_t d, std::size_t k) const { return n_dk[d * num_topics + k]; }
  std::uint32_t topic_word(std::size_t k, std::size_t w) const { return n_kw[k * vocab_size + w]; }

  /// Empty string when all count identities hold, else a description.
  std::string check_invariants() const;
};

/// Random initial assignment drawn from the substream (seed, sweep 0, doc).
GibbsState init_gibbs_state(std::span<const BowDocument> bows, std::size_t vocab_size,
                            const LdaHyperparams& hp);

/// One full pass; every token is resampled once, documents in input order.
/// The document d uses the substream (seed, sweep, d).
void gibbs_sweep(GibbsState& state, const LdaHyperparams& hp, int sweep);

/// Conditional for a single token with its own assignment already removed.
void token_conditional(const GibbsState& state, const LdaHyperparams& hp, std::size_t doc,
                       std::uint32_t word, std::span<double> out);

struct SweepLog {
  int sweep = 0;
  double log_likelihood = 0.0;  // log p(w | z)
  double perplexity = 0.0;      // from the current single-sample estimates
};

struct TopicModel {
  LdaHyperparams hyperparams;
  std::vector<std::string> vocabulary;
  std::vector<std::string> doc_ids;
  Matrix phi;    // topics x vocab
  Matrix theta;  // docs x topics
  std::vector<SweepLog> training_log;

  std::size_t num_topics() const noexcept { return phi.rows(); }
  std::size_t vocab_size() const noexcept { return phi.cols(); }
  std::size_t num_docs() const noexcept { return theta.rows(); }
  std::uint64_t vocab_hash() const;
};

struct TrainObserver {
  /// Called after every sweep (1-based sweep index).
  std::function<void(const GibbsState&, int sweep)> after_sweep;
};

TopicModel train_lda(std::span<const BowDocument> bows, const Vocabulary& vocab,
                     const LdaHyperparams& hp, const TrainObserver& observer = {});

/// Smoothed single-sample estimates from the current counts.
Matrix estimate_phi(const GibbsState& state, const LdaHyperparams& hp);
Matrix estimate_theta(const GibbsState& state, const LdaHyperparams& hp);

/// Fold-in Gibbs with phi held fixed. Theta is averaged over the second half
/// of the sweeps. Entries with word ids outside the model are ignored.
std::vector<double> infer_document_topics(const TopicModel& model, const BowDocument& bow,
                                          int sweeps, std::uint64_t seed);

struct WordProb {
  std::string word;
  double prob;
};

std::vector<WordProb> top_words(const TopicModel& model, int topic, std::size_t n);

/// exp(-sum log p(w|d) / N) with p(w|d) = sum_k theta[d,k] phi[k,w]; theta
/// rows align with bows.
double perplexity(const Matrix& phi, std::span<const BowDocument> bows, const Matrix& theta);
/// Same, folding in each document first.
double heldout_perplexity(const TopicModel& model, std::span<const BowDocument> bows, int sweeps,
                          std::uint64_t seed);

// On-disk layout in a directory: model.meta.json, phi.f64le, theta.f64le,
// vocab.txt, docs.txt, training_log.csv.
inline constexpr int kModelFormatVersion = 1;
void save_model(const TopicModel& model, const std::filesystem::path& dir);
TopicModel load_model(const std::filesystem::path& dir);

void write_matrix_f64le(const std::filesystem::path& path, const Matrix& m);
/// Throws unless the file holds exactly rows*cols doubles.
Matrix read_matrix_f64le(const std::filesystem::path& path, std::size_t rows, std::size_t cols);

}  // namespace poetopics

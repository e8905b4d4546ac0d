#pragma once
// Diversity measurement suite: bag-of-token embeddings, self-BLEU, Vendi
// score, novelty rate, question-profile statistics, vocabulary utilization,
// and epiplexity via prequential MDL with an n-gram observer.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vdsp/arena.hpp"
#include "vdsp/vocab.hpp"

namespace vdsp {

// Unit-L2 token-frequency vector over a question body, dimension |V|.
struct EmbeddingVector {
  std::vector<double> values;
};

EmbeddingVector embed_question(const Question& question, const TokenVocabulary& vocab);

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Mean over questions of sentence BLEU against the rest of the corpus.
double self_bleu(std::span<const std::vector<int>> corpus);

struct VendiConfig {
  int max_samples = 5000;
  std::uint64_t subsample_seed = 42;
  double eigen_threshold = 1e-12;
};

// exp of the Shannon entropy of the normalized eigenvalues of the cosine
// kernel; the effective number of distinct items. Uses whichever Gram side
// (n x n or d x d) is smaller.
double vendi_score(std::span<const EmbeddingVector> embeddings, const VendiConfig& config = {});

// Questions pooled across iterations, subsampled, then scored.
double cumulative_vendi(std::span<const EmbeddingVector> pooled, int subsample_cap,
                        std::uint64_t seed);

// Fraction of current items whose min cosine distance to every history item
// exceeds the threshold. Empty history -> not applicable.
std::optional<double> novelty_rate(std::span<const EmbeddingVector> current,
                                   std::span<const EmbeddingVector> history,
                                   double threshold = 0.3);

// Add-delta smoothed n-gram observer with incremental count updates.
class PrequentialObserver {
 public:
  PrequentialObserver(int vocab_size, int order, double smoothing);

  int vocab_size() const { return vocab_size_; }

  void observe(std::span<const int> seq);
  double sequence_nats(std::span<const int> seq) const;

 private:
  double token_nats(std::uint64_t ctx, int token) const;

  int vocab_size_;
  int order_;
  double delta_;
  struct CtxCounts {
    long long total = 0;
    std::unordered_map<int, long long> per_token;
  };
  std::unordered_map<std::uint64_t, CtxCounts> counts_;
};

struct ObserverConfig {
  int order = 2;  // bigram
  double smoothing = 0.1;
  int batch_size = 64;
  int max_epochs = 20;
  int patience = 5;
  double validation_split = 0.1;
  int min_corpus = 50;
  std::uint64_t shuffle_seed = 42;
};

struct EpiplexityResult {
  double bits_per_token = 0.0;
  int selected_epoch = 1;  // 1-based
  double online_nats = 0.0;
  std::vector<double> train_nats;  // total train loss after each epoch
  std::vector<double> val_nats;    // total validation loss after each epoch
  long long n_train_tokens = 0;
  long long n_val_tokens = 0;
};

// Prequential protocol on a caller-supplied observer (epoch 1 records each
// batch's loss before updating on it).
EpiplexityResult run_prequential(PrequentialObserver observer,
                                 std::span<const std::vector<int>> corpus,
                                 const ObserverConfig& config);

// Fresh-observer epiplexity of a corpus, bits per train token.
EpiplexityResult epiplexity(std::span<const std::vector<int>> corpus, const ObserverConfig& config,
                            int vocab_size);

// argmin over epochs of (online - train[e]) / (ln2 * N_train) +
// val[e] / (ln2 * N_val); ties -> earliest. Returns a 1-based epoch.
int mdl_select_epoch(double online_nats, std::span<const double> train_nats,
                     std::span<const double> val_nats, long long n_train_tokens,
                     long long n_val_tokens);

struct QuestionProfile {
  int n_valid = 0;
  double mean_tokens_per_question = 0.0;
  double mean_distinct_numerics = 0.0;
};

QuestionProfile question_profile(std::span<const Question> corpus, const TokenVocabulary& vocab);

// Union of token IDs across the bodies of format-valid questions.
int unique_token_count(std::span<const Question> corpus);

// Per-(iteration, phase) diversity and curriculum statistics; the unit of
// persistence and plotting.
struct MetricsRecord {
  int iteration = 0;
  std::string phase;  // "train" | "generate"
  double alpha = 1.0;
  double policy_entropy = 0.0;
  double self_bleu = 0.0;
  double mean_difficulty = 0.0;
  double vendi = 0.0;
  double cumulative_vendi = 0.0;
  std::optional<double> novelty_rate;  // undefined at iteration 1
  std::optional<double> epiplexity;    // undefined below the observer min corpus
  int n_valid_questions = 0;
  double mean_tokens_per_question = 0.0;
  double mean_distinct_numerics = 0.0;
  int unique_token_count = 0;
  double proposer_correctness = 0.0;
};

}  // namespace vdsp

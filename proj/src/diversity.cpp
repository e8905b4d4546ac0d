#include "vdsp/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "vdsp/bleu.hpp"
#include "vdsp/kernels.hpp"
#include "vdsp/rng.hpp"

namespace vdsp {

EmbeddingVector embed_question(const Question& question, const TokenVocabulary& vocab) {
  const auto body = question.body();
  if (body.empty()) throw std::invalid_argument("excluded-input: empty question body");
  EmbeddingVector e;
  e.values.assign(static_cast<std::size_t>(vocab.size()), 0.0);
  for (int tok : body) e.values[static_cast<std::size_t>(tok)] += 1.0;
  kernels::l2_normalize(e.values);
  return e;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return kernels::dot(a.values, b.values);
}

double self_bleu(std::span<const std::vector<int>> corpus) {
  if (corpus.size() < 2) throw std::invalid_argument("invalid-input: self_bleu needs >= 2 items");
  double total = 0.0;
  std::vector<std::vector<int>> refs;
  refs.reserve(corpus.size() - 1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    refs.clear();
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      if (j != i) refs.push_back(corpus[j]);
    }
    total += sentence_bleu(corpus[i], refs);
  }
  return total / static_cast<double>(corpus.size());
}

namespace {

// Cyclic Jacobi eigenvalues of a dense symmetric matrix (row-major n x n).
std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n) {
  if (n == 0) return {};
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(at(i, i)));
  scale = std::max(scale, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    }
    if (std::sqrt(off) < 1e-15 * scale * static_cast<double>(n)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = at(p, p), aqq = at(q, q);
        at(p, p) = app - t * apq;
        at(q, q) = aqq + t * apq;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = at(r, p), arq = at(r, q);
          at(r, p) = arp - s * (arq + tau * arp);
          at(p, r) = at(r, p);
          at(r, q) = arq + s * (arp - tau * arq);
          at(q, r) = at(r, q);
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  return eig;
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= cap) return idx;
  Rng rng(seed);
  // Partial Fisher-Yates: the first `cap` entries become the sample.
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  return idx;
}

}  // namespace

double vendi_score(std::span<const EmbeddingVector> embeddings, const VendiConfig& config) {
  if (embeddings.empty()) throw std::invalid_argument("invalid-input: vendi_score on empty set");
  const std::vector<std::size_t> idx = subsample_indices(
      embeddings.size(), static_cast<std::size_t>(config.max_samples), config.subsample_seed);
  const std::size_t n = idx.size();
  const std::size_t d = embeddings[0].values.size();

  std::vector<double> gram;
  std::size_t side;
  if (n <= d) {
    side = n;
    gram.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = kernels::dot(embeddings[idx[i]].values, embeddings[idx[j]].values);
        gram[i * n + j] = v;
        gram[j * n + i] = v;
      }
    }
  } else {
    // Same nonzero spectrum as the n x n kernel, cheaper for n >> d.
    side = d;
    gram.assign(d * d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const std::vector<double>& x = embeddings[idx[r]].values;
      for (std::size_t i = 0; i < d; ++i) {
        if (x[i] == 0.0) continue;
        kernels::axpy(x[i], x, std::span<double>(gram).subspan(i * d, d));
      }
    }
  }

  std::vector<double> eig = jacobi_eigenvalues(std::move(gram), side);
  double total = 0.0;
  for (double& v : eig) {
    if (v < 0.0) v = 0.0;
    total += v;
  }
  if (total <= 0.0) throw std::runtime_error("vendi_score: degenerate kernel");
  double entropy = 0.0;
  for (double v : eig) {
    const double lam = v / total;
    if (lam >= config.eigen_threshold) entropy -= lam * std::log(lam);
  }
  return std::exp(entropy);
}

double cumulative_vendi(std::span<const EmbeddingVector> pooled, int subsample_cap,
                        std::uint64_t seed) {
  VendiConfig cfg;
  cfg.max_samples = subsample_cap;
  cfg.subsample_seed = seed;
  return vendi_score(pooled, cfg);
}

std::optional<double> novelty_rate(std::span<const EmbeddingVector> current,
                                   std::span<const EmbeddingVector> history, double threshold) {
  if (history.empty()) return std::nullopt;
  if (current.empty()) return 0.0;
  std::size_t novel = 0;
  for (const EmbeddingVector& cur : current) {
    double min_dist = 2.0;
    for (const EmbeddingVector& old : history) {
      min_dist = std::min(min_dist, 1.0 - cosine_similarity(cur, old));
      if (min_dist <= threshold) break;
    }
    if (min_dist > threshold) ++novel;
  }
  return static_cast<double>(novel) / static_cast<double>(current.size());
}

// ---------------------------------------------------------------------------
// Prequential observer
// ---------------------------------------------------------------------------

namespace {

// Trailing (order-1)-token context before position pos; empty slots 0.
std::uint64_t observer_ctx(std::span<const int> seq, std::size_t pos, int order) {
  std::uint64_t key = 0;
  const std::size_t len = std::min<std::size_t>(pos, static_cast<std::size_t>(order - 1));
  for (std::size_t j = 0; j < len; ++j) {
    key |= static_cast<std::uint64_t>(seq[pos - 1 - j] + 1) << (16 * j);
  }
  return key;
}

}  // namespace

PrequentialObserver::PrequentialObserver(int vocab_size, int order, double smoothing)
    : vocab_size_(vocab_size), order_(order), delta_(smoothing) {
  if (vocab_size < 2) throw std::invalid_argument("observer: vocab size too small");
  if (order < 1 || order > 4) throw std::invalid_argument("observer: order must be 1..4");
  if (!(smoothing > 0.0)) throw std::invalid_argument("observer: smoothing must be > 0");
}

double PrequentialObserver::token_nats(std::uint64_t ctx, int token) const {
  long long total = 0, count = 0;
  auto it = counts_.find(ctx);
  if (it != counts_.end()) {
    total = it->second.total;
    auto jt = it->second.per_token.find(token);
    if (jt != it->second.per_token.end()) count = jt->second;
  }
  const double p = (static_cast<double>(count) + delta_) /
                   (static_cast<double>(total) + delta_ * static_cast<double>(vocab_size_));
  return -std::log(p);
}

void PrequentialObserver::observe(std::span<const int> seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CtxCounts& c = counts_[observer_ctx(seq, i, order_)];
    ++c.total;
    ++c.per_token[seq[i]];
  }
}

double PrequentialObserver::sequence_nats(std::span<const int> seq) const {
  double nats = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    nats += token_nats(observer_ctx(seq, i, order_), seq[i]);
  }
  return nats;
}

EpiplexityResult run_prequential(PrequentialObserver observer,
                                 std::span<const std::vector<int>> corpus,
                                 const ObserverConfig& config) {
  if (static_cast<int>(corpus.size()) < config.min_corpus) {
    throw std::invalid_argument("invalid-input: corpus below observer minimum size");
  }

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.shuffle_seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  const std::size_t n_val =
      std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(corpus.size()) *
                                                        config.validation_split));
  const std::size_t n_train = corpus.size() - n_val;
  if (n_train == 0) throw std::invalid_argument("invalid-input: no training sequences");
  const std::span<const std::size_t> train_idx(order.data(), n_train);
  const std::span<const std::size_t> val_idx(order.data() + n_train, n_val);

  EpiplexityResult res;
  for (std::size_t i : train_idx) res.n_train_tokens += static_cast<long long>(corpus[i].size());
  for (std::size_t i : val_idx) res.n_val_tokens += static_cast<long long>(corpus[i].size());
  if (res.n_train_tokens == 0) throw std::invalid_argument("invalid-input: empty train tokens");

  auto loss_over = [&](std::span<const std::size_t> idx) {
    double nats = 0.0;
    for (std::size_t i : idx) nats += observer.sequence_nats(corpus[i]);
    return nats;
  };

  const std::size_t bsz = static_cast<std::size_t>(config.batch_size);
  double best_val = 0.0;
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t start = 0; start < n_train; start += bsz) {
      const std::size_t end = std::min(n_train, start + bsz);
      if (epoch == 1) {
        // Prequential pass: batch loss before updating on it.
        for (std::size_t b = start; b < end; ++b) {
          res.online_nats += observer.sequence_nats(corpus[train_idx[b]]);
        }
      }
      for (std::size_t b = start; b < end; ++b) observer.observe(corpus[train_idx[b]]);
    }
    res.train_nats.push_back(loss_over(train_idx));
    res.val_nats.push_back(loss_over(val_idx));

    const double val = res.val_nats.back();
    if (epoch == 1 || val < best_val) {
      best_val = val;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  res.selected_epoch = mdl_select_epoch(res.online_nats, res.train_nats, res.val_nats,
                                        res.n_train_tokens, res.n_val_tokens);
  const double train_at_sel = res.train_nats[static_cast<std::size_t>(res.selected_epoch - 1)];
  res.bits_per_token =
      (res.online_nats - train_at_sel) / (std::log(2.0) * static_cast<double>(res.n_train_tokens));
  return res;
}

EpiplexityResult epiplexity(std::span<const std::vector<int>> corpus, const ObserverConfig& config,
                            int vocab_size) {
  return run_prequential(PrequentialObserver(vocab_size, config.order, config.smoothing), corpus,
                         config);
}

int mdl_select_epoch(double online_nats, std::span<const double> train_nats,
                     std::span<const double> val_nats, long long n_train_tokens,
                     long long n_val_tokens) {
  if (train_nats.empty() || train_nats.size() != val_nats.size()) {
    throw std::invalid_argument("mdl_select_epoch: need matching non-empty loss curves");
  }
  const double ln2 = std::log(2.0);
  int best = 1;
  double best_crit = 0.0;
  for (std::size_t e = 0; e < train_nats.size(); ++e) {
    const double epi = (online_nats - train_nats[e]) / (ln2 * static_cast<double>(n_train_tokens));
    const double crit = epi + val_nats[e] / (ln2 * static_cast<double>(n_val_tokens));
    if (e == 0 || crit < best_crit) {
      best_crit = crit;
      best = static_cast<int>(e) + 1;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

QuestionProfile question_profile(std::span<const Question> corpus, const TokenVocabulary& vocab) {
  QuestionProfile p;
  double token_sum = 0.0, numerics_sum = 0.0;
  for (const Question& q : corpus) {
    if (!q.format_valid) continue;
    ++p.n_valid;
    token_sum += static_cast<double>(q.raw_tokens.size());
    std::set<std::string> runs;
    std::string run;
    for (int tok : q.body()) {
      if (vocab.is_digit(tok)) {
        run.push_back(static_cast<char>('0' + vocab.digit_value(tok)));
      } else if (!run.empty()) {
        runs.insert(run);
        run.clear();
      }
    }
    if (!run.empty()) runs.insert(run);
    numerics_sum += static_cast<double>(runs.size());
  }
  if (p.n_valid > 0) {
    p.mean_tokens_per_question = token_sum / p.n_valid;
    p.mean_distinct_numerics = numerics_sum / p.n_valid;
  }
  return p;
}

int unique_token_count(std::span<const Question> corpus) {
  std::set<int> ids;
  for (const Question& q : corpus) {
    if (!q.format_valid) continue;
    for (int tok : q.body()) ids.insert(tok);
  }
  return static_cast<int>(ids.size());
}

}  // namespace vdsp

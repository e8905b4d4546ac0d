#pragma once
// Tabular autoregressive softmax policy over fixed-order token contexts.
// Plays both the proposer and solver roles. Unseen contexts read as all-zero
// logit rows (uniform next-token distribution); rows materialize on update.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vdsp/mask.hpp"
#include "vdsp/rng.hpp"

namespace vdsp {

// Packed trailing token window: 16 bits per slot holding id+1, empty slots 0.
using ContextKey = std::uint64_t;

struct PolicyConfig {
  int context_order = 2;   // tokens of history, 1..3
  double temperature = 1.0;
  double top_p = 1.0;      // 1.0 disables nucleus truncation
};

struct Rollout {
  std::vector<int> tokens;             // generated tokens, ends with EOS or at max length
  std::vector<double> full_logprobs;   // per step, unmasked softmax
  std::vector<double> masked_logprobs; // per step, masked softmax
  int mask_batch_index = 0;

  double full_logprob_sum() const;
};

struct VisitedStep {
  ContextKey context;
  int token;
};

class ContextualSoftmaxPolicy {
 public:
  enum class Role { Proposer, Solver };

  ContextualSoftmaxPolicy(int vocab_size, PolicyConfig config, Role role);

  int vocab_size() const { return vocab_size_; }
  int context_order() const { return config_.context_order; }
  const PolicyConfig& config() const { return config_; }
  Role role() const { return role_; }
  std::size_t row_count() const { return table_.size(); }

  ContextKey key_for(std::span<const int> context) const;
  bool has_row(ContextKey key) const { return table_.count(key) != 0; }
  std::vector<double> logits_for(ContextKey key) const;
  std::vector<double>& row_mut(ContextKey key);  // materializes as zeros

  // Valid distribution; exactly zero on masked tokens when a mask is given.
  std::vector<double> next_token_dist(std::span<const int> context, const VocabMask* mask) const;

  double token_logprob(std::span<const int> context, int token) const;  // unmasked
  double token_logprob_masked(std::span<const int> context, int token, const VocabMask& mask) const;

  // Autoregressive sampling under the mask, starting after `prompt`.
  // Records both log-prob tracks per emitted token.
  Rollout sample_sequence(std::span<const int> prompt, const VocabMask& mask, int max_len,
                          int eos_id, Rng& rng) const;

  // Sum of per-step unmasked log-probabilities of `tokens` given `prompt`.
  double sequence_logprob_full(std::span<const int> prompt, std::span<const int> tokens) const;

  // Mean Shannon entropy (nats) of the unmasked next-token distribution.
  double policy_entropy(std::span<const ContextKey> contexts) const;

  ContextualSoftmaxPolicy snapshot() const { return *this; }

  // Bit-exact text checkpoint (hexfloat rows, sorted keys).
  void save(const std::filesystem::path& file) const;
  static ContextualSoftmaxPolicy load(const std::filesystem::path& file);

  std::uint64_t content_hash() const;

 private:
  std::vector<double> dist_from_logits(std::vector<double> logits, const VocabMask* mask) const;

  int vocab_size_ = 0;
  PolicyConfig config_;
  Role role_ = Role::Proposer;
  std::unordered_map<ContextKey, std::vector<double>> table_;
};

// (context, chosen token) pairs a rollout visits, given its prompt.
std::vector<VisitedStep> visited_steps(std::span<const int> prompt, std::span<const int> tokens,
                                       int context_order);

// Trailing window of at most `context_order` ids ending at position `pos`
// (exclusive) of prompt+tokens.
ContextKey context_key_at(std::span<const int> prompt, std::span<const int> tokens,
                          std::size_t pos, int context_order);

}  // namespace vdsp

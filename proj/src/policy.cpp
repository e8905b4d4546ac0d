#include "vdsp/policy.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "vdsp/kernels.hpp"

namespace vdsp {

double Rollout::full_logprob_sum() const {
  return std::accumulate(full_logprobs.begin(), full_logprobs.end(), 0.0);
}

ContextualSoftmaxPolicy::ContextualSoftmaxPolicy(int vocab_size, PolicyConfig config, Role role)
    : vocab_size_(vocab_size), config_(config), role_(role) {
  if (vocab_size < 2 || vocab_size > 0xfffe) {
    throw std::invalid_argument("policy: vocab size out of range");
  }
  if (config.context_order < 1 || config.context_order > 3) {
    throw std::invalid_argument("policy: context order must be 1..3");
  }
  if (!(config.temperature > 0.0)) throw std::invalid_argument("policy: temperature must be > 0");
  if (!(config.top_p > 0.0) || config.top_p > 1.0) {
    throw std::invalid_argument("policy: top_p must be in (0, 1]");
  }
}

ContextKey ContextualSoftmaxPolicy::key_for(std::span<const int> context) const {
  const int k = config_.context_order;
  const std::size_t len = std::min<std::size_t>(context.size(), static_cast<std::size_t>(k));
  ContextKey key = 0;
  for (std::size_t j = 0; j < len; ++j) {
    const int id = context[context.size() - 1 - j];
    key |= static_cast<ContextKey>(id + 1) << (16 * j);
  }
  return key;
}

std::vector<double> ContextualSoftmaxPolicy::logits_for(ContextKey key) const {
  auto it = table_.find(key);
  if (it == table_.end()) return std::vector<double>(static_cast<std::size_t>(vocab_size_), 0.0);
  return it->second;
}

std::vector<double>& ContextualSoftmaxPolicy::row_mut(ContextKey key) {
  auto [it, inserted] = table_.try_emplace(key);
  if (inserted) it->second.assign(static_cast<std::size_t>(vocab_size_), 0.0);
  return it->second;
}

std::vector<double> ContextualSoftmaxPolicy::dist_from_logits(std::vector<double> logits,
                                                              const VocabMask* mask) const {
  if (mask != nullptr) apply_mask_inplace(logits, *mask);
  std::vector<double> out(logits.size());
  kernels::softmax(logits, out);
  if (mask != nullptr) {
    // exp underflow already gives 0; pin exact zeros on masked slots regardless
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (mask->bits[i] == 0) out[i] = 0.0;
    }
  }
  return out;
}

std::vector<double> ContextualSoftmaxPolicy::next_token_dist(std::span<const int> context,
                                                             const VocabMask* mask) const {
  return dist_from_logits(logits_for(key_for(context)), mask);
}

double ContextualSoftmaxPolicy::token_logprob(std::span<const int> context, int token) const {
  const std::vector<double> logits = logits_for(key_for(context));
  return logits[static_cast<std::size_t>(token)] - kernels::logsumexp(logits);
}

double ContextualSoftmaxPolicy::token_logprob_masked(std::span<const int> context, int token,
                                                     const VocabMask& mask) const {
  std::vector<double> logits = logits_for(key_for(context));
  apply_mask_inplace(logits, mask);
  return logits[static_cast<std::size_t>(token)] - kernels::logsumexp(logits);
}

namespace {

// Nucleus truncation: keep the smallest prefix of descending-probability
// tokens whose mass reaches top_p, renormalize the rest to zero.
void apply_top_p(std::vector<double>& probs, double top_p) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  double cum = 0.0;
  std::size_t keep = order.size();
  for (std::size_t i = 0; i < order.size(); ++i) {
    cum += probs[order[i]];
    if (cum >= top_p) {
      keep = i + 1;
      break;
    }
  }
  std::vector<std::uint8_t> kept(probs.size(), 0);
  for (std::size_t i = 0; i < keep; ++i) kept[order[i]] = 1;
  double mass = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!kept[i]) probs[i] = 0.0;
    mass += probs[i];
  }
  for (double& p : probs) p /= mass;
}

}  // namespace

Rollout ContextualSoftmaxPolicy::sample_sequence(std::span<const int> prompt, const VocabMask& mask,
                                                 int max_len, int eos_id, Rng& rng) const {
  if (max_len < 1) throw std::invalid_argument("sample_sequence: max_len must be >= 1");
  if (static_cast<int>(mask.bits.size()) != vocab_size_) {
    throw std::invalid_argument("sample_sequence: mask size mismatch");
  }
  Rollout r;
  r.mask_batch_index = mask.batch_index;
  std::vector<int> window(prompt.begin(), prompt.end());
  for (int t = 0; t < max_len; ++t) {
    const ContextKey key = key_for(window);
    std::vector<double> logits = logits_for(key);
    std::vector<double> sampling = logits;
    if (config_.temperature != 1.0) {
      kernels::scale(sampling, 1.0 / config_.temperature);
    }
    apply_mask_inplace(sampling, mask);
    std::vector<double> probs(sampling.size());
    kernels::softmax(sampling, probs);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (mask.bits[i] == 0) probs[i] = 0.0;
    }
    if (config_.top_p < 1.0) apply_top_p(probs, config_.top_p);
    const int tok = static_cast<int>(rng.categorical(probs));

    const double lse_full = kernels::logsumexp(logits);
    r.full_logprobs.push_back(logits[static_cast<std::size_t>(tok)] - lse_full);
    std::vector<double> masked = logits;
    apply_mask_inplace(masked, mask);
    r.masked_logprobs.push_back(masked[static_cast<std::size_t>(tok)] - kernels::logsumexp(masked));
    r.tokens.push_back(tok);

    if (tok == eos_id) break;
    window.push_back(tok);
  }
  return r;
}

double ContextualSoftmaxPolicy::sequence_logprob_full(std::span<const int> prompt,
                                                      std::span<const int> tokens) const {
  if (tokens.empty()) throw std::invalid_argument("sequence_logprob_full: empty token sequence");
  double sum = 0.0;
  for (const VisitedStep& step : visited_steps(prompt, tokens, config_.context_order)) {
    const std::vector<double> logits = logits_for(step.context);
    sum += logits[static_cast<std::size_t>(step.token)] - kernels::logsumexp(logits);
  }
  return sum;
}

double ContextualSoftmaxPolicy::policy_entropy(std::span<const ContextKey> contexts) const {
  if (contexts.empty()) throw std::invalid_argument("policy_entropy: empty context sample");
  double total = 0.0;
  std::vector<double> probs(static_cast<std::size_t>(vocab_size_));
  for (ContextKey key : contexts) {
    const std::vector<double> logits = logits_for(key);
    kernels::softmax(logits, probs);
    total += kernels::entropy(probs);
  }
  return total / static_cast<double>(contexts.size());
}

ContextKey context_key_at(std::span<const int> prompt, std::span<const int> tokens,
                          std::size_t pos, int context_order) {
  ContextKey key = 0;
  const std::size_t len = std::min<std::size_t>(pos, static_cast<std::size_t>(context_order));
  for (std::size_t j = 0; j < len; ++j) {
    const std::size_t idx = pos - 1 - j;
    const int id = idx < prompt.size() ? prompt[idx] : tokens[idx - prompt.size()];
    key |= static_cast<ContextKey>(id + 1) << (16 * j);
  }
  return key;
}

std::vector<VisitedStep> visited_steps(std::span<const int> prompt, std::span<const int> tokens,
                                       int context_order) {
  std::vector<VisitedStep> steps;
  steps.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    steps.push_back({context_key_at(prompt, tokens, prompt.size() + i, context_order), tokens[i]});
  }
  return steps;
}

void ContextualSoftmaxPolicy::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "vdsp-policy 1\n";
  out << "k " << config_.context_order << "\n";
  out << "vocab " << vocab_size_ << "\n";
  out << "role " << (role_ == Role::Proposer ? "proposer" : "solver") << "\n";
  out << "temperature " << std::hexfloat << config_.temperature << "\n";
  out << "top_p " << std::hexfloat << config_.top_p << "\n";
  out << std::defaultfloat;
  std::vector<ContextKey> keys;
  keys.reserve(table_.size());
  for (const auto& [k, _] : table_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  out << "rows " << keys.size() << "\n";
  char buf[64];
  for (ContextKey k : keys) {
    std::snprintf(buf, sizeof buf, "%" PRIx64, k);
    out << buf;
    for (double v : table_.at(k)) {
      std::snprintf(buf, sizeof buf, " %a", v);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

ContextualSoftmaxPolicy ContextualSoftmaxPolicy::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != "vdsp-policy" || version != 1) {
    throw std::runtime_error("bad policy checkpoint header in " + file.string());
  }
  PolicyConfig cfg;
  int vocab = 0;
  std::string role_word, value;
  in >> word >> cfg.context_order;
  in >> word >> vocab;
  in >> word >> role_word;
  in >> word >> value;
  cfg.temperature = std::strtod(value.c_str(), nullptr);
  in >> word >> value;
  cfg.top_p = std::strtod(value.c_str(), nullptr);
  const Role role = role_word == "solver" ? Role::Solver : Role::Proposer;
  ContextualSoftmaxPolicy p(vocab, cfg, role);
  std::size_t rows = 0;
  in >> word >> rows;
  for (std::size_t r = 0; r < rows; ++r) {
    in >> value;
    const ContextKey key = std::strtoull(value.c_str(), nullptr, 16);
    std::vector<double>& row = p.row_mut(key);
    for (int v = 0; v < vocab; ++v) {
      in >> value;
      row[static_cast<std::size_t>(v)] = std::strtod(value.c_str(), nullptr);
    }
  }
  if (!in) throw std::runtime_error("truncated policy checkpoint: " + file.string());
  return p;
}

std::uint64_t ContextualSoftmaxPolicy::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  std::vector<ContextKey> keys;
  keys.reserve(table_.size());
  for (const auto& [k, _] : table_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (ContextKey k : keys) {
    mix(&k, sizeof k);
    const auto& row = table_.at(k);
    mix(row.data(), row.size() * sizeof(double));
  }
  return h;
}

}  // namespace vdsp

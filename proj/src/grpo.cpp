#include "vdsp/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "vdsp/kernels.hpp"

namespace vdsp {

namespace {

constexpr double kRatioLo = 1e-8;
constexpr double kRatioHi = 1e8;

void check_batch(const GroupBatch& b) {
  const std::size_t g = b.rollouts.size();
  if (g < 2) throw std::invalid_argument("invalid-group: need at least 2 rollouts");
  if (b.rewards.size() != g || b.old_full_logprobs.size() != g) {
    throw std::invalid_argument("group batch arrays must all have length G");
  }
  for (double r : b.rewards) {
    if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward in group batch");
  }
}

// Cache of softmax rows keyed by context, valid while the policy is unchanged.
class SoftmaxCache {
 public:
  explicit SoftmaxCache(const ContextualSoftmaxPolicy& policy) : policy_(policy) {}

  const std::vector<double>& probs(ContextKey key) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const std::vector<double> logits = policy_.logits_for(key);
    std::vector<double> p(logits.size());
    kernels::softmax(logits, p);
    return cache_.emplace(key, std::move(p)).first->second;
  }

 private:
  const ContextualSoftmaxPolicy& policy_;
  std::unordered_map<ContextKey, std::vector<double>> cache_;
};

}  // namespace

std::vector<double> group_advantages(std::span<const double> rewards, double sigma_floor) {
  if (rewards.size() < 2) throw std::invalid_argument("invalid-group: need at least 2 rewards");
  const double n = static_cast<double>(rewards.size());
  const double mu = kernels::reduce_sum(rewards) / n;
  double var = 0.0;
  bool all_equal = true;
  for (double r : rewards) {
    var += (r - mu) * (r - mu);
    all_equal = all_equal && r == rewards[0];
  }
  std::vector<double> adv(rewards.size(), 0.0);
  if (all_equal) return adv;
  const double sigma = std::max(std::sqrt(var / n), sigma_floor);
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mu) / sigma;
  return adv;
}

double importance_ratio(double new_logprob, double old_logprob) {
  if (!std::isfinite(new_logprob) || !std::isfinite(old_logprob)) {
    throw std::invalid_argument("importance_ratio: non-finite log-prob");
  }
  return std::clamp(std::exp(new_logprob - old_logprob), kRatioLo, kRatioHi);
}

double clipped_surrogate(std::span<const double> ratios, std::span<const double> advantages,
                         double clip_epsilon) {
  if (ratios.size() != advantages.size()) {
    throw std::invalid_argument("clipped_surrogate: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double clipped = std::clamp(ratios[i], 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    sum += std::min(ratios[i] * advantages[i], clipped * advantages[i]);
  }
  return sum / static_cast<double>(ratios.size());
}

double kl_estimate(const ContextualSoftmaxPolicy& policy, const ContextualSoftmaxPolicy& reference,
                   std::span<const GroupBatch> batches) {
  if (batches.empty()) throw std::invalid_argument("kl_estimate: no batches");
  SoftmaxCache cur(policy), ref(reference);
  double sum = 0.0;
  std::size_t n_tokens = 0;
  for (const GroupBatch& b : batches) {
    for (const Rollout& roll : b.rollouts) {
      for (const VisitedStep& s :
           visited_steps(b.prompt_tokens, roll.tokens, policy.context_order())) {
        const double p_cur = cur.probs(s.context)[static_cast<std::size_t>(s.token)];
        const double p_ref = ref.probs(s.context)[static_cast<std::size_t>(s.token)];
        const double r = p_ref / p_cur;
        sum += r - std::log(r) - 1.0;
        ++n_tokens;
      }
    }
  }
  return n_tokens == 0 ? 0.0 : sum / static_cast<double>(n_tokens);
}

namespace {

struct BatchEval {
  double surrogate = 0.0;
  double kl = 0.0;
  std::vector<double> advantages;
  std::vector<double> ratios;
};

BatchEval eval_batch(const ContextualSoftmaxPolicy& policy, const GroupBatch& b,
                     const GrpoConfig& config, SoftmaxCache& cur, SoftmaxCache& ref) {
  check_batch(b);
  BatchEval ev;
  ev.advantages = group_advantages(b.rewards, config.sigma_floor);
  ev.ratios.reserve(b.rollouts.size());
  for (std::size_t i = 0; i < b.rollouts.size(); ++i) {
    const double new_lp = policy.sequence_logprob_full(b.prompt_tokens, b.rollouts[i].tokens);
    ev.ratios.push_back(importance_ratio(new_lp, b.old_full_logprobs[i]));
  }
  ev.surrogate = clipped_surrogate(ev.ratios, ev.advantages, config.clip_epsilon);

  double kl_sum = 0.0;
  std::size_t n_tokens = 0;
  for (const Rollout& roll : b.rollouts) {
    for (const VisitedStep& s :
         visited_steps(b.prompt_tokens, roll.tokens, policy.context_order())) {
      const double p_cur = cur.probs(s.context)[static_cast<std::size_t>(s.token)];
      const double p_ref = ref.probs(s.context)[static_cast<std::size_t>(s.token)];
      const double r = p_ref / p_cur;
      kl_sum += r - std::log(r) - 1.0;
      ++n_tokens;
    }
  }
  ev.kl = n_tokens == 0 ? 0.0 : kl_sum / static_cast<double>(n_tokens);
  return ev;
}

}  // namespace

double grpo_objective(const ContextualSoftmaxPolicy& policy, std::span<const GroupBatch> batches,
                      const GrpoConfig& config, const ContextualSoftmaxPolicy& reference) {
  if (batches.empty()) throw std::invalid_argument("grpo_objective: no batches");
  SoftmaxCache cur(policy), ref(reference);
  double total = 0.0;
  for (const GroupBatch& b : batches) {
    const BatchEval ev = eval_batch(policy, b, config, cur, ref);
    total += ev.surrogate - config.kl_beta * ev.kl;
  }
  return total / static_cast<double>(batches.size());
}

GrpoStats grpo_step(ContextualSoftmaxPolicy& policy, std::span<const GroupBatch> batches,
                    const GrpoConfig& config, const ContextualSoftmaxPolicy& reference) {
  if (batches.empty()) throw std::invalid_argument("grpo_step: no batches");
  SoftmaxCache cur(policy), ref(reference);
  const double inv_b = 1.0 / static_cast<double>(batches.size());

  std::unordered_map<ContextKey, std::vector<double>> grad;
  auto grad_row = [&](ContextKey key) -> std::vector<double>& {
    auto [it, inserted] = grad.try_emplace(key);
    if (inserted) it->second.assign(static_cast<std::size_t>(policy.vocab_size()), 0.0);
    return it->second;
  };
  // Adds w * (onehot(token) - softmax(ctx)) to the gradient row.
  auto add_score = [&](ContextKey key, int token, double w) {
    std::vector<double>& g = grad_row(key);
    const std::vector<double>& p = cur.probs(key);
    kernels::axpy(-w, p, g);
    g[static_cast<std::size_t>(token)] += w;
  };

  GrpoStats stats;
  double abs_adv_sum = 0.0;
  std::size_t n_rollouts = 0;

  for (const GroupBatch& b : batches) {
    const BatchEval ev = eval_batch(policy, b, config, cur, ref);
    stats.objective += (ev.surrogate - config.kl_beta * ev.kl) * inv_b;
    stats.kl += ev.kl * inv_b;
    for (double a : ev.advantages) abs_adv_sum += std::abs(a);
    n_rollouts += b.rollouts.size();

    const double inv_g = 1.0 / static_cast<double>(b.rollouts.size());
    std::size_t batch_tokens = 0;
    for (const Rollout& roll : b.rollouts) batch_tokens += roll.tokens.size();

    for (std::size_t i = 0; i < b.rollouts.size(); ++i) {
      const double rho = ev.ratios[i];
      const double adv = ev.advantages[i];
      const double unclipped = rho * adv;
      const double clipped =
          std::clamp(rho, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) * adv;
      // Gradient flows only through the active unclipped branch; the ratio
      // clamp bounds also zero it.
      double coef = 0.0;
      if (unclipped <= clipped && rho > kRatioLo && rho < kRatioHi) coef = adv * rho;
      const double w_step = coef * inv_g * inv_b;
      if (w_step != 0.0) {
        for (const VisitedStep& s :
             visited_steps(b.prompt_tokens, b.rollouts[i].tokens, policy.context_order())) {
          add_score(s.context, s.token, w_step);
        }
      }
    }

    if (config.kl_beta != 0.0 && batch_tokens > 0) {
      const double w_kl = -config.kl_beta * inv_b / static_cast<double>(batch_tokens);
      for (const Rollout& roll : b.rollouts) {
        for (const VisitedStep& s :
             visited_steps(b.prompt_tokens, roll.tokens, policy.context_order())) {
          const double p_cur = cur.probs(s.context)[static_cast<std::size_t>(s.token)];
          const double p_ref = ref.probs(s.context)[static_cast<std::size_t>(s.token)];
          const double r = p_ref / p_cur;
          add_score(s.context, s.token, w_kl * (1.0 - r));
        }
      }
    }
  }

  double norm_sq = 0.0;
  for (const auto& [key, g] : grad) {
    for (double v : g) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "abort-step: non-finite gradient at context " << key;
        throw std::runtime_error(msg.str());
      }
      norm_sq += v * v;
    }
  }
  stats.grad_norm = std::sqrt(norm_sq);
  stats.mean_abs_advantage = n_rollouts == 0 ? 0.0 : abs_adv_sum / static_cast<double>(n_rollouts);

  for (const auto& [key, g] : grad) {
    kernels::axpy(config.learning_rate, g, policy.row_mut(key));
  }
  return stats;
}

}  // namespace vdsp

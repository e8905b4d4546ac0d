#pragma once
// GRPO: group-normalized advantages, clipped importance-ratio surrogate,
// low-variance KL penalty, and the gradient-ascent step on tabular policies.
// Gradients flow through the full (unmasked) vocabulary.

#include <span>
#include <vector>

#include "vdsp/policy.hpp"

namespace vdsp {

// One prompt group: G rollouts with rewards and the log-probs they had under
// the phase-start snapshot (which serves as both pi_old and pi_ref).
struct GroupBatch {
  int prompt_id = 0;
  std::vector<int> prompt_tokens;
  std::vector<Rollout> rollouts;
  std::vector<double> rewards;
  std::vector<double> old_full_logprobs;
};

struct GrpoConfig {
  double clip_epsilon = 0.2;
  double kl_beta = 0.01;
  double learning_rate = 0.1;
  int group_size = 4;
  double sigma_floor = 1e-8;
};

struct GrpoStats {
  double objective = 0.0;
  double kl = 0.0;
  double mean_abs_advantage = 0.0;
  double grad_norm = 0.0;
};

// (r_i - mean) / max(std, sigma_floor) with population std; exactly zero when
// all rewards are equal.
std::vector<double> group_advantages(std::span<const double> rewards, double sigma_floor);

// exp(new - old), clamped to [1e-8, 1e8].
double importance_ratio(double new_logprob, double old_logprob);

// Mean over the group of min(rho*A, clip(rho, 1-eps, 1+eps)*A).
double clipped_surrogate(std::span<const double> ratios, std::span<const double> advantages,
                         double clip_epsilon);

// Mean over visited rollout tokens of r - ln r - 1 with
// r = pi_ref(token|ctx) / pi_theta(token|ctx). Nonnegative per token.
double kl_estimate(const ContextualSoftmaxPolicy& policy, const ContextualSoftmaxPolicy& reference,
                   std::span<const GroupBatch> batches);

// Objective value: mean over batches of (clipped surrogate - beta * KL).
// Pure; used by the finite-difference oracle.
double grpo_objective(const ContextualSoftmaxPolicy& policy, std::span<const GroupBatch> batches,
                      const GrpoConfig& config, const ContextualSoftmaxPolicy& reference);

// One in-place gradient-ascent step on the analytic gradient of the objective.
// Throws std::runtime_error on a non-finite gradient.
GrpoStats grpo_step(ContextualSoftmaxPolicy& policy, std::span<const GroupBatch> batches,
                    const GrpoConfig& config, const ContextualSoftmaxPolicy& reference);

}  // namespace vdsp

#pragma once
// Co-evolution orchestrator: alternating proposer and solver phases across T
// iterations, with per-batch mask scheduling, curriculum generation and
// filtering, GRPO updates, and the per-iteration diversity suite.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vdsp/arena.hpp"
#include "vdsp/diversity.hpp"
#include "vdsp/grpo.hpp"
#include "vdsp/mask.hpp"
#include "vdsp/policy.hpp"
#include "vdsp/vocab.hpp"

namespace vdsp {

enum class Phase { Train, Generate };

std::string phase_name(Phase phase);
Phase phase_from_name(const std::string& name);

// The shared starting point for both roles. Stands in for a pretrained base
// model that knows the question format: its logit table is primed from a
// fixed, run-seed-independent corpus of well-formed questions.
struct BasePolicyConfig {
  int prime_questions = 400;
  double prime_smoothing = 0.5;
  double prime_strength = 1.0;
  std::uint64_t prime_seed = 0xba5e;
};

struct RunConfig {
  VocabConfig vocab{.filler_count = 46};  // 64 tokens
  int iterations = 5;                     // T
  int proposer_steps = 6;
  int solver_steps = 20;
  int group_size = 4;   // G
  int sc_samples = 10;  // M
  DifficultyWindow window;
  RetentionSchedule schedule{RetentionSchedule::Mode::Fixed, 0.75, 0.75, 5};
  std::set<Phase> dropout_phases{Phase::Train, Phase::Generate};
  GrpoConfig proposer_grpo;
  GrpoConfig solver_grpo;
  int curriculum_size = 256;  // K
  double tau_bleu = 0.5;
  double lambda_rep = 0.25;
  int proposer_batch = 16;  // prompts per proposer GRPO step
  int solver_batch = 8;     // questions per solver GRPO step
  int generation_batch = 32;
  int context_order = 2;
  double temperature = 1.0;
  double top_p = 1.0;
  int max_question_len = 32;
  int max_answer_len = 16;
  int entropy_context_sample = 256;
  BasePolicyConfig base;
};

void validate_config(const RunConfig& config);  // throws std::invalid_argument naming the field

struct MaskLogEntry {
  int iteration = 0;
  Phase phase = Phase::Train;
  int batch_index = 0;
  double alpha = 1.0;
  std::uint64_t seed_tag = 0;
};

struct QuestionRecord {
  int iteration = 0;
  Phase phase = Phase::Train;
  int batch_index = 0;
  Question question;
  std::optional<double> acc;  // scored questions only
  double reward = 0.0;
};

struct StepStats {
  int iteration = 0;
  Phase phase = Phase::Train;
  int step = 0;
  GrpoStats grpo;
  double mean_reward = 0.0;
  int n_valid = 0;
};

// Standing counters re-asserted at the orchestrator level.
struct AuditCounters {
  long long masked_token_emissions = 0;  // sampled tokens the active mask had removed
  long long window_violations = 0;       // solver-trained questions outside the window
};

struct CoevoState {
  ContextualSoftmaxPolicy proposer;
  ContextualSoftmaxPolicy solver;
  TokenVocabulary vocab;
  ProtectedSet protected_set;
  int completed_iterations = 0;
  std::uint64_t master_seed = 0;

  std::vector<MetricsRecord> metrics;
  std::vector<QuestionRecord> question_dump;
  std::vector<MaskLogEntry> mask_log;
  std::vector<StepStats> step_stats;
  std::vector<std::string> events;
  AuditCounters audit;

  // Per-phase embedding streams, one entry per completed iteration.
  std::vector<std::vector<EmbeddingVector>> history_train;
  std::vector<std::vector<EmbeddingVector>> history_generate;
};

// A random well-formed question (with EOS), answer equal to the oracle value.
std::vector<int> sample_wellformed_question(const TokenVocabulary& vocab, Rng& rng);

ContextualSoftmaxPolicy make_base_policy(const TokenVocabulary& vocab, const RunConfig& config,
                                         ContextualSoftmaxPolicy::Role role);

CoevoState init_state(const RunConfig& config, std::uint64_t master_seed);

// Phase 1: train the proposer against the frozen solver.
void run_proposer_phase(CoevoState& state, const RunConfig& config, int iteration);

// Phase 2: generate the curriculum with the frozen proposer, filter to the
// difficulty window, train the solver on it.
void run_solver_phase(CoevoState& state, const RunConfig& config, int iteration);

CoevoState run_coevolution(const RunConfig& config, std::uint64_t master_seed);

}  // namespace vdsp

#pragma once
// The synthetic task domain: micro-language question grammar and parser, exact
// arithmetic oracle, solver self-consistency scoring, proposer/solver rewards,
// BLEU repetition penalty, and curriculum filtering.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vdsp/policy.hpp"
#include "vdsp/vocab.hpp"

namespace vdsp {

// Integer expression: operands joined left-to-right by + - *, with *
// binding tighter than + and -.
struct ArithExpr {
  std::vector<long long> operands;
  std::vector<char> ops;  // length operands.size() - 1
};

// A parsed question. Grammar (fillers allowed only inside the body and
// ignored by the parser): QBEG body QEND ABEG digit+ AEND [EOS].
// Adjacent digits concatenate into multi-digit numbers.
struct Question {
  std::vector<int> raw_tokens;
  bool format_valid = false;
  ArithExpr expr;                            // populated iff format_valid
  std::optional<long long> proposer_answer;  // present iff format_valid
  std::size_t body_begin = 0, body_end = 0;  // token range between QBEG/QEND

  std::span<const int> body() const {
    return std::span<const int>(raw_tokens).subspan(body_begin, body_end - body_begin);
  }
};

struct SolveOutcome {
  std::vector<std::optional<long long>> answers;  // M entries
  std::optional<long long> majority_answer;       // ties -> smallest value
  double acc = 0.0;                               // |answers == majority| / M
  std::optional<long long> oracle_answer;         // instrumentation only, never in rewards
};

struct DifficultyWindow {
  double tau_min = 0.3;
  double tau_max = 0.7;

  bool contains(double acc) const { return acc >= tau_min && acc <= tau_max; }
};

// Format failure is a value (reward-zero path), never an error.
Question parse_question(std::span<const int> tokens, const TokenVocabulary& vocab);

// Exact integer value; * binds tighter than +/-, which associate left.
// parse_question rejects expressions whose evaluation leaves int64 range, so
// this never overflows on a parsed expression.
long long oracle_eval(const ArithExpr& expr);

// Sample the solver M times on the question prompt (tokens through QEND, no
// mask) and score self-consistency against the majority vote.
SolveOutcome solver_consistency(const ContextualSoftmaxPolicy& solver, const Question& question,
                                int m_samples, const TokenVocabulary& vocab, int max_answer_len,
                                Rng& rng);

// Extract an integer from the first ABEG digit+ AEND span, if any.
std::optional<long long> parse_answer_span(std::span<const int> tokens,
                                           const TokenVocabulary& vocab);

// min(acc, 1-acc) inside the closed window, 0 outside.
double proposer_reward(double acc, const DifficultyWindow& window);

// Pairwise BLEU >= tau_bleu single-linkage clusters; member of a cluster of
// size s in a batch of size B is penalized lambda_rep * (s-1) / B.
std::vector<double> repetition_penalty(std::span<const std::vector<int>> question_bodies,
                                       double tau_bleu, double lambda_rep);

// 1 iff the solver's parsed answer equals the proposer's stated answer.
double solver_reward(const std::optional<long long>& solver_answer, const Question& question);

// Keep exactly the questions whose acc falls in the closed window, in order.
std::vector<std::size_t> filter_curriculum(std::span<const double> accs,
                                           const DifficultyWindow& window);

// Fraction of questions whose stated answer matches the oracle; instrumentation.
double proposer_correctness(std::span<const Question> questions);

}  // namespace vdsp

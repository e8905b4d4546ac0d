#include "vdsp/arena.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "vdsp/bleu.hpp"

namespace vdsp {

namespace {

constexpr int kMaxDigitRun = 12;

bool in_int64(__int128 v) {
  return v >= static_cast<__int128>(LLONG_MIN) && v <= static_cast<__int128>(LLONG_MAX);
}

// Left-to-right evaluation with * binding tighter than +/-.
std::optional<long long> eval_checked(const ArithExpr& expr) {
  if (expr.operands.empty() || expr.ops.size() + 1 != expr.operands.size()) return std::nullopt;
  __int128 total = 0;
  __int128 term = expr.operands[0];
  int sign = 1;
  for (std::size_t i = 0; i < expr.ops.size(); ++i) {
    const __int128 next = expr.operands[i + 1];
    if (expr.ops[i] == '*') {
      term *= next;
      if (!in_int64(term)) return std::nullopt;
    } else {
      total += sign * term;
      if (!in_int64(total)) return std::nullopt;
      sign = expr.ops[i] == '+' ? 1 : -1;
      term = next;
    }
  }
  total += sign * term;
  if (!in_int64(total)) return std::nullopt;
  return static_cast<long long>(total);
}

// Maximal digit run starting at `i`; advances `i` past the run.
std::optional<long long> read_digit_run(std::span<const int> tokens, const TokenVocabulary& vocab,
                                        std::size_t& i) {
  long long value = 0;
  int digits = 0;
  while (i < tokens.size() && vocab.is_digit(tokens[i])) {
    value = value * 10 + vocab.digit_value(tokens[i]);
    ++digits;
    ++i;
    if (digits > kMaxDigitRun) return std::nullopt;
  }
  if (digits == 0) return std::nullopt;
  return value;
}

}  // namespace

Question parse_question(std::span<const int> tokens, const TokenVocabulary& vocab) {
  Question q;
  q.raw_tokens.assign(tokens.begin(), tokens.end());

  std::span<const int> t = tokens;
  if (!t.empty() && t.back() == vocab.eos()) t = t.first(t.size() - 1);

  // QBEG ... QEND
  if (t.size() < 2 || t[0] != vocab.qbeg()) return q;
  std::size_t qend_pos = t.size();
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] == vocab.qend()) {
      qend_pos = i;
      break;
    }
  }
  if (qend_pos == t.size()) return q;
  q.body_begin = 1;
  q.body_end = qend_pos;

  // Body: fillers ignored, remaining tokens must form number (op number)*.
  ArithExpr expr;
  {
    std::vector<int> core;
    for (std::size_t i = 1; i < qend_pos; ++i) {
      const int tok = t[i];
      if (vocab.is_filler(tok)) continue;
      if (!vocab.is_digit(tok) && !vocab.is_operator(tok)) return q;
      core.push_back(tok);
    }
    std::size_t i = 0;
    const std::span<const int> cs(core);
    auto first = read_digit_run(cs, vocab, i);
    if (!first) return q;
    expr.operands.push_back(*first);
    while (i < core.size()) {
      if (!vocab.is_operator(core[i])) return q;
      expr.ops.push_back(vocab.operator_char(core[i]));
      ++i;
      auto operand = read_digit_run(cs, vocab, i);
      if (!operand) return q;
      expr.operands.push_back(*operand);
    }
  }
  if (!eval_checked(expr)) return q;

  // ABEG digit+ AEND, then nothing.
  std::size_t i = qend_pos + 1;
  if (i >= t.size() || t[i] != vocab.abeg()) return q;
  ++i;
  long long answer = 0;
  int digits = 0;
  while (i < t.size() && vocab.is_digit(t[i])) {
    answer = answer * 10 + vocab.digit_value(t[i]);
    ++digits;
    ++i;
    if (digits > kMaxDigitRun) return q;
  }
  if (digits == 0 || i >= t.size() || t[i] != vocab.aend()) return q;
  if (i + 1 != t.size()) return q;

  q.expr = std::move(expr);
  q.proposer_answer = answer;
  q.format_valid = true;
  return q;
}

long long oracle_eval(const ArithExpr& expr) {
  const auto v = eval_checked(expr);
  if (!v) throw std::invalid_argument("oracle_eval: malformed or overflowing expression");
  return *v;
}

std::optional<long long> parse_answer_span(std::span<const int> tokens,
                                           const TokenVocabulary& vocab) {
  std::size_t i = 0;
  while (i < tokens.size() && tokens[i] != vocab.abeg()) ++i;
  if (i == tokens.size()) return std::nullopt;
  ++i;
  long long value = 0;
  int digits = 0;
  while (i < tokens.size() && vocab.is_digit(tokens[i])) {
    value = value * 10 + vocab.digit_value(tokens[i]);
    ++digits;
    ++i;
    if (digits > kMaxDigitRun) return std::nullopt;
  }
  if (digits == 0 || i == tokens.size() || tokens[i] != vocab.aend()) return std::nullopt;
  return value;
}

SolveOutcome solver_consistency(const ContextualSoftmaxPolicy& solver, const Question& question,
                                int m_samples, const TokenVocabulary& vocab, int max_answer_len,
                                Rng& rng) {
  if (!question.format_valid) {
    throw std::invalid_argument("solver_consistency: question is not format-valid");
  }
  if (m_samples < 1) throw std::invalid_argument("solver_consistency: M must be >= 1");

  // Prompt is the question through QEND; dropout never applies to the solver.
  const std::span<const int> prompt =
      std::span<const int>(question.raw_tokens).first(question.body_end + 1);
  const VocabMask no_mask = all_ones_mask(solver.vocab_size(), 0);

  SolveOutcome out;
  out.answers.reserve(static_cast<std::size_t>(m_samples));
  for (int s = 0; s < m_samples; ++s) {
    const Rollout roll = solver.sample_sequence(prompt, no_mask, max_answer_len, vocab.eos(), rng);
    out.answers.push_back(parse_answer_span(roll.tokens, vocab));
  }

  std::map<long long, int> votes;
  for (const auto& a : out.answers) {
    if (a) ++votes[*a];
  }
  if (!votes.empty()) {
    // std::map iterates keys ascending, so > keeps the smallest on ties.
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    out.majority_answer = best->first;
    out.acc = static_cast<double>(best->second) / static_cast<double>(m_samples);
  }
  out.oracle_answer = oracle_eval(question.expr);
  return out;
}

double proposer_reward(double acc, const DifficultyWindow& window) {
  if (acc < 0.0 || acc > 1.0) throw std::invalid_argument("proposer_reward: acc outside [0, 1]");
  if (!window.contains(acc)) return 0.0;
  return std::min(acc, 1.0 - acc);
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<double> repetition_penalty(std::span<const std::vector<int>> question_bodies,
                                       double tau_bleu, double lambda_rep) {
  const std::size_t n = question_bodies.size();
  std::vector<double> penalties(n, 0.0);
  if (n < 2) return penalties;

  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::vector<int> ref_j[]{question_bodies[j]};
      const std::vector<int> ref_i[]{question_bodies[i]};
      const double sim = std::max(sentence_bleu(question_bodies[i], ref_j),
                                  sentence_bleu(question_bodies[j], ref_i));
      if (sim >= tau_bleu) uf.unite(i, j);
    }
  }
  std::vector<int> cluster_size(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++cluster_size[uf.find(i)];
  for (std::size_t i = 0; i < n; ++i) {
    const int s = cluster_size[uf.find(i)];
    penalties[i] = lambda_rep * static_cast<double>(s - 1) / static_cast<double>(n);
  }
  return penalties;
}

double solver_reward(const std::optional<long long>& solver_answer, const Question& question) {
  if (!question.format_valid) {
    throw std::invalid_argument("solver_reward: question is not format-valid");
  }
  return solver_answer && *solver_answer == *question.proposer_answer ? 1.0 : 0.0;
}

std::vector<std::size_t> filter_curriculum(std::span<const double> accs,
                                           const DifficultyWindow& window) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < accs.size(); ++i) {
    if (window.contains(accs[i])) kept.push_back(i);
  }
  return kept;
}

double proposer_correctness(std::span<const Question> questions) {
  std::size_t valid = 0, correct = 0;
  for (const Question& q : questions) {
    if (!q.format_valid) continue;
    ++valid;
    if (*q.proposer_answer == oracle_eval(q.expr)) ++correct;
  }
  return valid == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(valid);
}

}  // namespace vdsp

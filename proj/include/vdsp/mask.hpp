#pragma once
// Per-batch Bernoulli vocabulary masks: drawing, logit masking, the retention
// schedule, and allowed-token-ID export. Masks are immutable once drawn and a
// pure function of their seed tag.

#include <cstdint>
#include <span>
#include <vector>

#include "vdsp/vocab.hpp"

namespace vdsp {

// Large negative finite logit whose exp underflows to exactly zero in double
// precision, so masked tokens get softmax probability 0 without NaNs.
constexpr double kMaskedLogit = -1e9;

struct VocabMask {
  std::vector<std::uint8_t> bits;  // survival flag per token ID
  int batch_index = 0;
  double alpha = 1.0;
  std::uint64_t seed_tag = 0;

  bool survives(int id) const { return bits[static_cast<std::size_t>(id)] != 0; }
  int surviving_count() const;
  bool all_ones() const;
};

struct RetentionSchedule {
  enum class Mode { Fixed, LinearAnneal };
  Mode mode = Mode::Fixed;
  double alpha_start = 1.0;
  double alpha_end = 1.0;  // ignored in Fixed mode
  int total_iterations = 1;
};

// Every protected token survives; each other token survives independently
// with probability alpha. Same seed tag -> same mask.
VocabMask draw_mask(const TokenVocabulary& vocab, const ProtectedSet& protected_set, double alpha,
                    std::uint64_t seed_tag, int batch_index);

VocabMask all_ones_mask(int vocab_size, int batch_index);

// Masked entries become kMaskedLogit; survivors pass through unchanged.
std::vector<double> apply_mask(std::span<const double> logits, const VocabMask& mask);
void apply_mask_inplace(std::span<double> logits, const VocabMask& mask);

// Full-precision schedule value for a 1-based iteration.
double schedule_alpha(const RetentionSchedule& schedule, int iteration);
// Rounded to 2 decimals for reporting.
double schedule_alpha_reported(const RetentionSchedule& schedule, int iteration);

// Strictly increasing IDs of surviving tokens.
std::vector<int> export_allowed_ids(const VocabMask& mask);
VocabMask mask_from_allowed_ids(std::span<const int> allowed, int vocab_size, int batch_index,
                                double alpha, std::uint64_t seed_tag);

}  // namespace vdsp

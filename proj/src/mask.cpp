#include "vdsp/mask.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vdsp/kernels.hpp"
#include "vdsp/rng.hpp"

namespace vdsp {

int VocabMask::surviving_count() const {
  int n = 0;
  for (std::uint8_t b : bits) n += b != 0;
  return n;
}

bool VocabMask::all_ones() const {
  return std::all_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

VocabMask draw_mask(const TokenVocabulary& vocab, const ProtectedSet& protected_set, double alpha,
                    std::uint64_t seed_tag, int batch_index) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("invalid-parameter: alpha must be in (0, 1]");
  }
  if (static_cast<int>(protected_set.is_protected.size()) != vocab.size()) {
    throw std::invalid_argument("protected set does not match vocabulary size");
  }
  VocabMask m;
  m.batch_index = batch_index;
  m.alpha = alpha;
  m.seed_tag = seed_tag;
  m.bits.assign(static_cast<std::size_t>(vocab.size()), 0);
  Rng rng(seed_tag);
  for (int id = 0; id < vocab.size(); ++id) {
    if (protected_set.contains(id)) {
      m.bits[static_cast<std::size_t>(id)] = 1;
    } else {
      m.bits[static_cast<std::size_t>(id)] = rng.bernoulli(alpha) ? 1 : 0;
    }
  }
  return m;
}

VocabMask all_ones_mask(int vocab_size, int batch_index) {
  VocabMask m;
  m.batch_index = batch_index;
  m.alpha = 1.0;
  m.seed_tag = 0;
  m.bits.assign(static_cast<std::size_t>(vocab_size), 1);
  return m;
}

std::vector<double> apply_mask(std::span<const double> logits, const VocabMask& mask) {
  std::vector<double> out(logits.begin(), logits.end());
  apply_mask_inplace(out, mask);
  return out;
}

void apply_mask_inplace(std::span<double> logits, const VocabMask& mask) {
  if (logits.size() != mask.bits.size()) {
    throw std::invalid_argument("shape-error: logits/mask length mismatch");
  }
  kernels::masked_fill(logits, mask.bits, kMaskedLogit);
}

double schedule_alpha(const RetentionSchedule& schedule, int iteration) {
  if (iteration < 1 || iteration > schedule.total_iterations) {
    throw std::invalid_argument("invalid-parameter: iteration out of schedule range");
  }
  auto check = [](double a) {
    if (!(a > 0.0) || a > 1.0) {
      throw std::invalid_argument("invalid-parameter: schedule alpha must be in (0, 1]");
    }
  };
  check(schedule.alpha_start);
  if (schedule.mode == RetentionSchedule::Mode::Fixed) return schedule.alpha_start;
  check(schedule.alpha_end);
  if (schedule.total_iterations == 1) return schedule.alpha_start;
  const double t = static_cast<double>(iteration - 1) / static_cast<double>(schedule.total_iterations - 1);
  return schedule.alpha_start + t * (schedule.alpha_end - schedule.alpha_start);
}

double schedule_alpha_reported(const RetentionSchedule& schedule, int iteration) {
  return std::round(schedule_alpha(schedule, iteration) * 100.0) / 100.0;
}

std::vector<int> export_allowed_ids(const VocabMask& mask) {
  std::vector<int> ids;
  ids.reserve(mask.bits.size());
  for (int id = 0; id < static_cast<int>(mask.bits.size()); ++id) {
    if (mask.bits[static_cast<std::size_t>(id)] != 0) ids.push_back(id);
  }
  return ids;
}

VocabMask mask_from_allowed_ids(std::span<const int> allowed, int vocab_size, int batch_index,
                                double alpha, std::uint64_t seed_tag) {
  VocabMask m;
  m.batch_index = batch_index;
  m.alpha = alpha;
  m.seed_tag = seed_tag;
  m.bits.assign(static_cast<std::size_t>(vocab_size), 0);
  for (int id : allowed) {
    if (id < 0 || id >= vocab_size) throw std::invalid_argument("allowed ID outside vocabulary");
    m.bits[static_cast<std::size_t>(id)] = 1;
  }
  return m;
}

}  // namespace vdsp

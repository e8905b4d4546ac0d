#include "vdsp/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace vdsp {

namespace {

// n <= 4 tokens packed 16 bits each (token IDs stay below 0xfffe).
using NgramKey = std::uint64_t;

void count_ngrams(std::span<const int> seq, int order,
                  std::unordered_map<NgramKey, int>& counts) {
  if (static_cast<int>(seq.size()) < order) return;
  for (std::size_t i = 0; i + order <= seq.size(); ++i) {
    NgramKey key = 0;
    for (int j = 0; j < order; ++j) {
      key = (key << 16) | static_cast<NgramKey>(seq[i + j] + 1);
    }
    ++counts[key];
  }
}

}  // namespace

double sentence_bleu(std::span<const int> hypothesis,
                     std::span<const std::vector<int>> references, int max_order) {
  if (hypothesis.empty() || references.empty()) return 0.0;

  // Closest reference length, ties toward the shorter.
  const auto h_len = static_cast<long long>(hypothesis.size());
  long long r_len = -1;
  for (const auto& ref : references) {
    const auto len = static_cast<long long>(ref.size());
    if (r_len < 0 || std::llabs(len - h_len) < std::llabs(r_len - h_len) ||
        (std::llabs(len - h_len) == std::llabs(r_len - h_len) && len < r_len)) {
      r_len = len;
    }
  }

  double log_precision_sum = 0.0;
  int included_orders = 0;
  for (int order = 1; order <= max_order; ++order) {
    std::unordered_map<NgramKey, int> hyp_counts;
    count_ngrams(hypothesis, order, hyp_counts);
    if (hyp_counts.empty()) break;  // hypothesis too short for this order

    std::unordered_map<NgramKey, int> ref_max;
    for (const auto& ref : references) {
      std::unordered_map<NgramKey, int> rc;
      count_ngrams(ref, order, rc);
      for (const auto& [key, c] : rc) {
        auto it = ref_max.find(key);
        if (it == ref_max.end() || it->second < c) ref_max[key] = c;
      }
    }

    long long matched = 0, total = 0;
    for (const auto& [key, c] : hyp_counts) {
      total += c;
      auto it = ref_max.find(key);
      if (it != ref_max.end()) matched += std::min(c, it->second);
    }

    double precision;
    if (order == 1) {
      if (matched == 0) return 0.0;
      precision = static_cast<double>(matched) / static_cast<double>(total);
    } else {
      precision = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    }
    log_precision_sum += std::log(precision);
    ++included_orders;
  }
  if (included_orders == 0) return 0.0;

  const double brevity =
      h_len >= r_len ? 1.0
                     : std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(h_len));
  return brevity * std::exp(log_precision_sum / included_orders);
}

}  // namespace vdsp

#pragma once
// Sentence-level BLEU over token-ID sequences, orders 1..4, add-one smoothing
// on orders >= 2 (unigram precision unsmoothed, so disjoint sequences score 0).

#include <span>
#include <vector>

namespace vdsp {

double sentence_bleu(std::span<const int> hypothesis,
                     std::span<const std::vector<int>> references, int max_order = 4);

}  // namespace vdsp

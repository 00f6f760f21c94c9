#pragma once

#include <set>
#include <string>
#include <vector>

#include "carryover/dialogue.hpp"
#include "carryover/embeddings.hpp"
#include "carryover/tensor.hpp"

namespace carryover {

struct Schema {
  std::string domain;
  std::set<std::string> keys;
};

double cosine_similarity(const Tensor& a, const Tensor& b);

/// Map context slots (distance >= 1) onto the schema of the current turn by
/// slot-key embedding similarity: argmax schema key if similarity >= tau,
/// else drop; ties broken lexicographically. Distance-0 slots pass through
/// with their own keys. Output preserves dialogue order (distance
/// descending, then span order); duplicates (same mapped key and span) keep
/// the smallest distance.
std::vector<CandidateSlot> generate_candidates(
    const Dialogue& dialogue, const std::vector<Slot>& context_slots,
    const Schema& schema, const EmbeddingTable& key_table, double tau);

/// Keep slots whose SLU score is strictly greater than the threshold.
std::vector<Slot> filter_nbest(
    const std::vector<std::pair<Slot, double>>& slu_slots,
    double threshold = 0.1);

}  // namespace carryover

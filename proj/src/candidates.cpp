#include "carryover/candidates.hpp"

#include <algorithm>
#include <map>

#include "carryover/encoders.hpp"
#include "carryover/errors.hpp"

namespace carryover {

double cosine_similarity(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  const double na = a.flat().norm();
  const double nb = b.flat().norm();
  if (na == 0.0 || nb == 0.0) throw ZeroVector();
  return a.flat().dot(b.flat()) / (na * nb);
}

std::vector<CandidateSlot> generate_candidates(
    const Dialogue& dialogue, const std::vector<Slot>& context_slots,
    const Schema& schema, const EmbeddingTable& key_table, double tau) {
  if (schema.keys.empty()) throw EmptySchema();

  std::map<std::string, Tensor> schema_enc;
  for (const auto& key : schema.keys)
    schema_enc.emplace(key, key_table.average_tokens(split_key(key)));

  std::vector<CandidateSlot> mapped;
  for (const Slot& slot : context_slots) {
    if (slot.distance == 0) {
      mapped.push_back(CandidateSlot{slot, slot.key, schema.domain});
      continue;
    }
    const Tensor enc = key_table.average_tokens(split_key(slot.key));
    std::string best_key;
    double best_sim = -2.0;
    for (const auto& [key, kenc] : schema_enc) {
      const double sim = cosine_similarity(enc, kenc);
      if (sim > best_sim) {  // map iteration is lexicographic; ties keep first
        best_sim = sim;
        best_key = key;
      }
    }
    if (best_sim >= tau)
      mapped.push_back(CandidateSlot{slot, best_key, schema.domain});
  }

  // Deduplicate same mapped key + same value, keeping the smallest distance.
  std::map<std::string, CandidateSlot> unique;
  std::vector<std::string> order;
  for (const CandidateSlot& c : mapped) {
    std::string sig = c.mapped_key;
    for (const auto& tok : slot_value_tokens(dialogue, c.source))
      sig += "\x1f" + tok;
    auto it = unique.find(sig);
    if (it == unique.end()) {
      unique.emplace(sig, c);
      order.push_back(sig);
    } else if (c.source.distance < it->second.source.distance) {
      it->second = c;
    }
  }

  // Dialogue order: distance descending, then span order.
  std::vector<CandidateSlot> out;
  for (const auto& sig : order) out.push_back(unique.at(sig));
  std::stable_sort(out.begin(), out.end(),
                   [](const CandidateSlot& a, const CandidateSlot& b) {
                     if (a.source.distance != b.source.distance)
                       return a.source.distance > b.source.distance;
                     return a.source.span_left < b.source.span_left;
                   });
  return out;
}

std::vector<Slot> filter_nbest(
    const std::vector<std::pair<Slot, double>>& slu_slots, double threshold) {
  std::vector<Slot> out;
  for (const auto& [slot, score] : slu_slots) {
    if (score > threshold) out.push_back(slot);
  }
  return out;
}

}  // namespace carryover

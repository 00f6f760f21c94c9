#pragma once

#include <set>
#include <string>
#include <vector>

#include "carryover/errors.hpp"

namespace carryover {

enum class Speaker { User, Agent };

struct Utterance {
  Speaker speaker;
  std::vector<std::string> tokens;
  int distance;  // offset from the most recent user utterance
};

struct Intent {
  std::vector<std::string> tokens;
};

/// Ordered oldest-first; distances form a contiguous descending run ending
/// at 0, and speakers alternate with distance parity (even=User, odd=Agent).
struct Dialogue {
  std::vector<Utterance> utterances;
  Intent current_intent;

  const Utterance& at_distance(int d) const {
    if (d < 0 || d >= static_cast<int>(utterances.size()))
      throw DistanceOutOfRange("no utterance at distance " + std::to_string(d));
    return utterances[utterances.size() - 1 - static_cast<std::size_t>(d)];
  }
};

/// Slot located by utterance distance, key, and inclusive token span [l:r].
struct Slot {
  int distance;
  std::string key;
  int span_left;
  int span_right;
};

/// Context slot mapped into the current turn's schema.
struct CandidateSlot {
  Slot source;
  std::string mapped_key;
  std::string domain;
};

/// One labeled training/eval example.
struct CarryoverInstance {
  Dialogue dialogue;
  std::vector<CandidateSlot> candidates;
  std::set<std::size_t> labels;
};

Dialogue build_dialogue(
    const std::vector<std::pair<Speaker, std::vector<std::string>>>& turns,
    Intent intent);

std::vector<std::string> slot_value_tokens(const Dialogue& dialogue,
                                           const Slot& slot);

/// Anchor rule: every distance-0 candidate must be labeled positive.
void validate_instance(const CarryoverInstance& instance);

/// Default ingestion tokenization: lowercase, split on whitespace.
std::vector<std::string> tokenize(const std::string& text);

std::string to_lower(std::string s);

}  // namespace carryover

#include "carryover/dialogue.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace carryover {

Dialogue build_dialogue(
    const std::vector<std::pair<Speaker, std::vector<std::string>>>& turns,
    Intent intent) {
  if (turns.empty()) throw EmptyDialogue();
  if (turns.back().first != Speaker::User)
    throw LastTurnNotUser("final turn must be a user utterance");
  for (std::size_t i = 1; i < turns.size(); ++i) {
    if (turns[i].first == turns[i - 1].first)
      throw AlternationViolation("consecutive turns share a speaker at index " +
                                 std::to_string(i));
  }
  Dialogue d;
  d.current_intent = std::move(intent);
  const int n = static_cast<int>(turns.size());
  for (int i = 0; i < n; ++i) {
    d.utterances.push_back(
        Utterance{turns[static_cast<std::size_t>(i)].first,
                  turns[static_cast<std::size_t>(i)].second, n - 1 - i});
  }
  return d;
}

std::vector<std::string> slot_value_tokens(const Dialogue& dialogue,
                                           const Slot& slot) {
  const Utterance& utt = dialogue.at_distance(slot.distance);
  const int len = static_cast<int>(utt.tokens.size());
  if (slot.span_left < 0 || slot.span_left > slot.span_right ||
      slot.span_right >= len)
    throw SpanOutOfRange("span [" + std::to_string(slot.span_left) + ":" +
                         std::to_string(slot.span_right) +
                         "] outside utterance of length " + std::to_string(len));
  return std::vector<std::string>(
      utt.tokens.begin() + slot.span_left,
      utt.tokens.begin() + slot.span_right + 1);
}

void validate_instance(const CarryoverInstance& instance) {
  const std::size_t n = instance.candidates.size();
  for (std::size_t idx : instance.labels) {
    if (idx >= n)
      throw InvariantViolation("label index out of range");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const CandidateSlot& c = instance.candidates[i];
    if (c.source.key.empty()) throw InvariantViolation("empty slot key");
    if (c.source.distance == 0 && instance.labels.count(i) == 0)
      throw InvariantViolation("distance-0 candidate not labeled positive");
    // Span must reference a real utterance.
    slot_value_tokens(instance.dialogue, c.source);
  }
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::istringstream in(to_lower(text));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace carryover

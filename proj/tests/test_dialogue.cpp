#include <doctest.h>

#include "carryover/dialogue.hpp"
#include "carryover/errors.hpp"

using namespace carryover;

namespace {

std::vector<std::pair<Speaker, std::vector<std::string>>> three_turns() {
  return {{Speaker::User, {"weather", "in", "san", "francisco"}},
          {Speaker::Agent, {"sunny", "today"}},
          {Speaker::User, {"and", "in", "arlington"}}};
}

}  // namespace

TEST_CASE("build_dialogue assigns distances backwards from the last turn") {
  const Dialogue single =
      build_dialogue({{Speaker::User, {"weather", "in", "arlington"}}},
                     Intent{{"GetWeather"}});
  CHECK(single.utterances.size() == 1);
  CHECK(single.utterances[0].distance == 0);
  CHECK(single.utterances[0].speaker == Speaker::User);

  const Dialogue d = build_dialogue(three_turns(), Intent{{"GetWeather"}});
  REQUIRE(d.utterances.size() == 3);
  CHECK(d.utterances[0].distance == 2);
  CHECK(d.utterances[1].distance == 1);
  CHECK(d.utterances[2].distance == 0);
  // index i holds distance n-1-i; at_distance inverts that
  CHECK(d.at_distance(2).tokens[0] == "weather");
  CHECK(d.at_distance(0).tokens[2] == "arlington");
}

TEST_CASE("build_dialogue rejects malformed turn sequences") {
  CHECK_THROWS_AS(build_dialogue({}, Intent{{"x"}}), EmptyDialogue);
  CHECK_THROWS_AS(
      build_dialogue({{Speaker::User, {"a"}}, {Speaker::Agent, {"b"}}},
                     Intent{{"x"}}),
      LastTurnNotUser);
  CHECK_THROWS_AS(
      build_dialogue({{Speaker::User, {"a"}}, {Speaker::User, {"b"}}},
                     Intent{{"x"}}),
      AlternationViolation);
}

TEST_CASE("slot_value_tokens returns the inclusive span") {
  const Dialogue d = build_dialogue(three_turns(), Intent{{"GetWeather"}});

  const Slot city{0, "City", 2, 2};
  CHECK(slot_value_tokens(d, city) == std::vector<std::string>{"arlington"});

  const Slot place{2, "Place", 2, 3};
  CHECK(slot_value_tokens(d, place) ==
        std::vector<std::string>{"san", "francisco"});
  CHECK(slot_value_tokens(d, place).size() ==
        static_cast<std::size_t>(place.span_right - place.span_left + 1));

  CHECK_THROWS_AS(slot_value_tokens(d, Slot{5, "k", 0, 0}),
                  DistanceOutOfRange);
  CHECK_THROWS_AS(slot_value_tokens(d, Slot{0, "k", 1, 3}), SpanOutOfRange);
}

TEST_CASE("validate_instance enforces the anchor rule") {
  const Dialogue d = build_dialogue(three_turns(), Intent{{"GetWeather"}});

  CarryoverInstance inst;
  inst.dialogue = d;
  inst.candidates = {
      CandidateSlot{Slot{0, "City", 2, 2}, "City", "weather"},
      CandidateSlot{Slot{2, "Place", 2, 3}, "Place", "weather"}};
  inst.labels = {0, 1};
  CHECK_NOTHROW(validate_instance(inst));

  // a distance-0 candidate left out of the labels violates the anchor rule
  inst.labels = {1};
  CHECK_THROWS_AS(validate_instance(inst), InvariantViolation);

  // labels must stay in range
  inst.labels = {0, 7};
  CHECK_THROWS_AS(validate_instance(inst), InvariantViolation);
}

TEST_CASE("tokenize lowercases and splits on whitespace") {
  CHECK(tokenize("Weather in  Arlington") ==
        std::vector<std::string>{"weather", "in", "arlington"});
  CHECK(tokenize("").empty());
}

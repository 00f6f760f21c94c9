#include <doctest.h>

#include <cmath>
#include <sstream>

#include "carryover/encoders.hpp"
#include "carryover/errors.hpp"

using namespace carryover;

namespace {

EmbeddingTable tiny_table() {
  Rng rng(11);
  return EmbeddingTable::random_init(
      {"weather", "city", "san", "francisco", "get"}, 4, rng);
}

void zero_all(ParameterStore& store) {
  for (auto& p : store.all()) p->value.flat().setZero();
}

Dialogue small_dialogue() {
  return build_dialogue(
      {{Speaker::User, {"weather", "san", "francisco"}},
       {Speaker::Agent, {"sunny", "today"}},
       {Speaker::User, {"and", "here"}}},
      Intent{{"GetWeather"}});
}

}  // namespace

TEST_CASE("lstm_cell_step matches the scalar oracle") {
  ParameterStore store;
  Rng rng(3);
  LstmParams params = make_lstm(store, "lstm", 1, 1, rng);
  zero_all(store);

  SUBCASE("zero weights and zero state give zero output") {
    Tape tape;
    LstmVars w = bind_lstm(tape, params);
    LstmState s = lstm_zero_state(tape, 1);
    LstmState next = lstm_cell_step(tape.input(Tensor::vector({2.0})),
                                    s, w);
    CHECK(next.c.value()[0] == doctest::Approx(0.0));
    CHECK(next.h.value()[0] == doctest::Approx(0.0));
  }

  SUBCASE("zero weights with c_prev=1: c=0.5, h=0.5*tanh(0.5)") {
    Tape tape;
    LstmVars w = bind_lstm(tape, params);
    LstmState s{tape.input(Tensor::vector({0.0})),
                tape.input(Tensor::vector({1.0}))};
    LstmState next =
        lstm_cell_step(tape.input(Tensor::vector({0.0})), s, w);
    CHECK(next.c.value()[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(next.h.value()[0] ==
          doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-10));
    CHECK(next.h.value()[0] == doctest::Approx(0.231059).epsilon(1e-5));
  }

  SUBCASE("input width mismatch throws") {
    Tape tape;
    LstmVars w = bind_lstm(tape, params);
    LstmState s = lstm_zero_state(tape, 1);
    CHECK_THROWS_AS(
        lstm_cell_step(tape.input(Tensor::vector({1.0, 2.0})), s, w),
        ShapeMismatch);
  }
}

TEST_CASE("make_lstm initializes the forget-gate bias to one") {
  ParameterStore store;
  Rng rng(3);
  LstmParams params = make_lstm(store, "lstm", 2, 3, rng);
  // gate packing [i; f; g; o], each block of size hidden
  for (Index j = 0; j < 3; ++j) {
    CHECK(params.b->value[j] == 0.0);          // input gate
    CHECK(params.b->value[3 + j] == 1.0);      // forget gate
    CHECK(params.b->value[6 + j] == 0.0);      // candidate
    CHECK(params.b->value[9 + j] == 0.0);      // output gate
  }
}

TEST_CASE("encode_dialogue covers every token and excludes separators") {
  EmbeddingTable table = tiny_table();
  Rng rng(5);
  table.ensure(kUserSeparator, rng);
  table.ensure(kAgentSeparator, rng);
  ParameterStore store;
  BiLstmParams weights = make_bilstm(store, "dlg", table.dim(), 3, rng);

  const Dialogue d = small_dialogue();
  Tape tape;
  DialogueEncoding enc = encode_dialogue(tape, table, d, weights);

  CHECK(enc.context.value().size() == 6);  // 2 * hidden
  REQUIRE(enc.token_states.size() == 3);
  CHECK(enc.token_states[0].size() == 3);
  CHECK(enc.token_states[1].size() == 2);
  CHECK(enc.token_states[2].size() == 2);
  CHECK(enc.token_states[0][0].value().size() == 6);
}

TEST_CASE("encode_dialogue with zero weights gives a zero context") {
  EmbeddingTable table = tiny_table();
  Rng rng(5);
  table.ensure(kUserSeparator, rng);
  table.ensure(kAgentSeparator, rng);
  ParameterStore store;
  BiLstmParams weights = make_bilstm(store, "dlg", table.dim(), 3, rng);
  zero_all(store);

  Tape tape;
  DialogueEncoding enc = encode_dialogue(tape, table, small_dialogue(),
                                         weights);
  CHECK(enc.context.value().flat().norm() == doctest::Approx(0.0));
}

TEST_CASE("split_key handles separators and camelCase") {
  CHECK(split_key("WeatherCity") ==
        std::vector<std::string>{"weather", "city"});
  CHECK(split_key("city_name") == std::vector<std::string>{"city", "name"});
  CHECK(split_key("drop-off point") ==
        std::vector<std::string>{"drop", "off", "point"});
  CHECK_THROWS_AS(split_key(""), EmptyKey);
}

TEST_CASE("encode_slot_key averages the split word embeddings") {
  std::istringstream in("weather 1 0\ncity 0 1\n");
  EmbeddingTable table = EmbeddingTable::load_vectors(in);
  Tape tape;
  Var key = encode_slot_key(tape, table, "WeatherCity");
  CHECK(key.value()[0] == doctest::Approx(0.5));
  CHECK(key.value()[1] == doctest::Approx(0.5));
}

TEST_CASE("slot value encodings follow their defining means") {
  std::istringstream in("san 1 0\nfrancisco 0 1\nweather 0 0\n");
  EmbeddingTable table = EmbeddingTable::load_vectors(in);
  const Dialogue d = small_dialogue();
  const Slot slot{2, "Place", 1, 2};  // "san francisco"

  SUBCASE("avg variant is the raw embedding mean") {
    Tape tape;
    Var v = encode_slot_value_avg(tape, table, d, slot);
    CHECK(v.value()[0] == doctest::Approx(0.5));
    CHECK(v.value()[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(
        encode_slot_value_avg(tape, table, d, Slot{2, "Place", 1, 9}),
        SpanOutOfRange);
  }

  SUBCASE("ctx variant averages the BiLSTM token states over the span") {
    Rng rng(5);
    table.ensure(kUserSeparator, rng);
    table.ensure(kAgentSeparator, rng);
    ParameterStore store;
    BiLstmParams weights = make_bilstm(store, "dlg", table.dim(), 3, rng);
    Tape tape;
    DialogueEncoding enc = encode_dialogue(tape, table, d, weights);
    Var v = encode_slot_value_ctx(enc, d, slot);
    const Tensor& s1 = enc.token_states[0][1].value();
    const Tensor& s2 = enc.token_states[0][2].value();
    for (Index i = 0; i < v.value().size(); ++i)
      CHECK(v.value()[i] == doctest::Approx(0.5 * (s1[i] + s2[i])));
  }
}

TEST_CASE("encode_distance looks up the clamped table row") {
  ParameterStore store;
  Parameter& table = store.create("dist", {7, 4});
  for (Index r = 0; r < 7; ++r)
    for (Index c = 0; c < 4; ++c) table.value.at(r, c) = 10.0 * r + c;

  Tape tape;
  CHECK(encode_distance(tape, table, 0).value()[1] == doctest::Approx(1.0));
  CHECK(encode_distance(tape, table, 9).value()[0] ==
        doctest::Approx(60.0));  // clamped to row d_max = 6
  CHECK_THROWS_AS(encode_distance(tape, table, -1), NegativeDistance);
}

TEST_CASE("assemble_slot_encoding concatenates key, value, distance") {
  Tape tape;
  Var key = tape.input(Tensor::vector({1.0}));
  Var val = tape.input(Tensor::vector({2.0}));
  Var dist = tape.input(Tensor::vector({3.0, 4.0, 5.0, 6.0}));
  SlotEncoding enc = assemble_slot_encoding(key, val, dist);
  REQUIRE(enc.full.value().size() == 6);
  for (Index i = 0; i < 6; ++i)
    CHECK(enc.full.value()[i] == doctest::Approx(1.0 + static_cast<double>(i)));

  Var bad = tape.input(Tensor::vector({3.0, 4.0, 5.0}));
  CHECK_THROWS_AS(assemble_slot_encoding(key, val, bad), ShapeMismatch);
}

TEST_CASE("encode_intent splits the intent name and averages") {
  std::istringstream in("get 1 0\nweather 0 1\n");
  EmbeddingTable table = EmbeddingTable::load_vectors(in);
  Tape tape;
  Var i = encode_intent(tape, table, Intent{{"GetWeather"}});
  CHECK(i.value()[0] == doctest::Approx(0.5));
  CHECK(i.value()[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(encode_intent(tape, table, Intent{{}}), EmptyIntent);
}

#include <doctest.h>

#include <algorithm>

#include "carryover/errors.hpp"
#include "carryover/model.hpp"
#include "carryover/synth.hpp"

using namespace carryover;

namespace {

std::vector<CandidateSlot> mixed_candidates() {
  // distances [2, 0, 1]
  return {CandidateSlot{Slot{2, "A", 0, 0}, "A", "d"},
          CandidateSlot{Slot{0, "B", 0, 0}, "B", "d"},
          CandidateSlot{Slot{1, "C", 0, 0}, "C", "d"}};
}

CarryoverModel small_model(DecoderKind kind, const SynthCorpus& corpus,
                           std::uint64_t seed) {
  ModelConfig config;
  config.decoder = kind;
  config.emb_dim = 6;
  config.lstm_hidden = 5;
  config.d_model = 12;
  config.heads = 2;
  config.d_k = 6;
  config.d_v = 6;
  config.pointer_hidden = 8;

  std::vector<std::string> vocab;
  std::set<std::string> seen;
  for (const auto& inst : corpus.train)
    for (const auto& utt : inst.dialogue.utterances)
      for (const auto& tok : utt.tokens)
        if (seen.insert(tok).second) vocab.push_back(tok);
  Rng rng(seed);
  return CarryoverModel::create(
      config, EmbeddingTable::random_init(vocab, config.emb_dim, rng), seed);
}

SynthCorpus tiny_corpus(std::uint64_t seed) {
  SynthConfig sc;
  sc.n_dialogues = 10;
  sc.seed = seed;
  return synth_generate(sc);
}

}  // namespace

TEST_CASE("order_slots policies") {
  const auto candidates = mixed_candidates();

  SUBCASE("temporal order sorts by distance descending") {
    const auto order =
        order_slots(candidates, {OrderingMode::TemporalOrder, 1});
    REQUIRE(order.size() == 3);
    CHECK(candidates[order[0]].source.distance == 2);
    CHECK(candidates[order[1]].source.distance == 1);
    CHECK(candidates[order[2]].source.distance == 0);
  }

  SUBCASE("temporal order breaks distance ties by span position") {
    std::vector<CandidateSlot> two = {
        CandidateSlot{Slot{2, "A", 3, 3}, "A", "d"},
        CandidateSlot{Slot{2, "B", 0, 1}, "B", "d"}};
    const auto order = order_slots(two, {OrderingMode::TemporalOrder, 1});
    CHECK(order == std::vector<std::size_t>{1, 0});
  }

  SUBCASE("turn-only order keeps the distance groups sorted") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      const auto order =
          order_slots(candidates, {OrderingMode::TurnOnlyOrder, seed});
      REQUIRE(order.size() == 3);
      CHECK(candidates[order[0]].source.distance == 2);
      CHECK(candidates[order[1]].source.distance == 1);
      CHECK(candidates[order[2]].source.distance == 0);
    }
  }

  SUBCASE("no-order is a seeded permutation, deterministic per seed") {
    const auto a = order_slots(candidates, {OrderingMode::NoOrder, 7});
    const auto b = order_slots(candidates, {OrderingMode::NoOrder, 7});
    CHECK(a == b);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2});
  }

  SUBCASE("single candidate and empty list are trivial") {
    std::vector<CandidateSlot> one = {candidates[0]};
    CHECK(order_slots(one, {OrderingMode::NoOrder, 1}) ==
          std::vector<std::size_t>{0});
    CHECK(order_slots(std::vector<CandidateSlot>{},
                      {OrderingMode::TemporalOrder, 1})
              .empty());
  }
}

TEST_CASE("multihead self-attention") {
  ParameterStore store;
  Rng rng(13);
  const Index d_model = 8, heads = 2, d_k = 4, d_v = 4;
  Parameter& wq = store.create_glorot("wq", d_model, heads * d_k, rng);
  Parameter& wk = store.create_glorot("wk", d_model, heads * d_k, rng);
  Parameter& wv = store.create_glorot("wv", d_model, heads * d_v, rng);
  Parameter& wo = store.create_glorot("wo", heads * d_v, d_model, rng);

  auto run = [&](const Tensor& x) {
    Tape tape;
    Var out = multihead_self_attention(
        tape.input(x), tape.leaf(wq), tape.leaf(wk), tape.leaf(wv),
        tape.leaf(wo), heads, d_k, d_v);
    return out.value();
  };

  SUBCASE("one row attends only to itself, so queries and keys are inert") {
    Tensor x({1, d_model});
    for (Index i = 0; i < d_model; ++i) x[i] = 0.1 * static_cast<double>(i);
    const Tensor base = run(x);
    wq.value.flat().setRandom();
    wk.value.flat().setRandom();
    const Tensor again = run(x);
    for (Index i = 0; i < d_model; ++i)
      CHECK(base[i] == doctest::Approx(again[i]).epsilon(1e-12));
  }

  SUBCASE("identical input rows produce identical output rows") {
    Tensor x({3, d_model});
    for (Index r = 0; r < 3; ++r)
      for (Index c = 0; c < d_model; ++c) x.at(r, c) = 0.3 * (double)c - 0.5;
    const Tensor out = run(x);
    for (Index r = 1; r < 3; ++r)
      for (Index c = 0; c < d_model; ++c)
        CHECK(out.at(r, c) == doctest::Approx(out.at(0, c)).epsilon(1e-12));
  }
}

TEST_CASE("independent probabilities ignore the rest of the candidate set") {
  const SynthCorpus corpus = tiny_corpus(21);
  CarryoverModel model =
      small_model(DecoderKind::Independent, corpus, 21);
  const OrderingPolicy policy{OrderingMode::TemporalOrder, 3};

  CarryoverInstance full = corpus.train[0];
  REQUIRE(full.candidates.size() >= 3);
  const Prediction p_full = model.predict(full, policy);

  CarryoverInstance reduced = full;
  reduced.candidates.erase(reduced.candidates.begin() + 1);
  reduced.labels.clear();
  for (std::size_t j = 0; j < reduced.candidates.size(); ++j)
    if (reduced.candidates[j].source.distance == 0) reduced.labels.insert(j);
  const Prediction p_reduced = model.predict(reduced, policy);

  // slot 0 is unaffected by dropping slot 1
  CHECK(p_reduced.per_slot_prob[0] ==
        doctest::Approx(p_full.per_slot_prob[0]).epsilon(1e-12));
}

TEST_CASE("transformer selection is permutation-invariant") {
  const SynthCorpus corpus = tiny_corpus(22);
  CarryoverModel model =
      small_model(DecoderKind::Transformer, corpus, 22);
  const OrderingPolicy policy{OrderingMode::TemporalOrder, 3};

  CarryoverInstance inst = corpus.train[1];
  const Prediction base = model.predict(inst, policy);

  // rotate the candidate list; selected indices must follow the rotation
  CarryoverInstance rotated = inst;
  std::rotate(rotated.candidates.begin(), rotated.candidates.begin() + 1,
              rotated.candidates.end());
  rotated.labels.clear();
  const std::size_t n = inst.candidates.size();
  for (std::size_t j : inst.labels) rotated.labels.insert((j + n - 1) % n);
  const Prediction moved = model.predict(rotated, policy);

  std::set<std::size_t> expected;
  for (std::size_t j : base.selected) expected.insert((j + n - 1) % n);
  CHECK(moved.selected == expected);
}

TEST_CASE("pointer decoding emits unique indices and halts") {
  const SynthCorpus corpus = tiny_corpus(23);
  CarryoverModel model = small_model(DecoderKind::Pointer, corpus, 23);
  const OrderingPolicy policy{OrderingMode::TemporalOrder, 3};

  for (const CarryoverInstance& inst : corpus.train) {
    const Prediction pred = model.predict(inst, policy);
    CHECK(pred.decode_trace.size() <= inst.candidates.size() + 1);
    std::set<int> seen;
    for (int idx : pred.decode_trace) {
      if (idx < 0) continue;  // END sentinel
      CHECK(seen.insert(idx).second);
      CHECK(idx < static_cast<int>(inst.candidates.size()));
    }
    CHECK(pred.selected.size() <= inst.candidates.size());
  }
}

#include <doctest.h>

#include <cmath>

#include "carryover/synth.hpp"
#include "carryover/train.hpp"

using namespace carryover;

namespace {

EmbeddingTable vocab_table(const std::vector<CarryoverInstance>& corpus,
                           Index dim, std::uint64_t seed) {
  std::vector<std::string> vocab;
  std::set<std::string> seen;
  for (const auto& inst : corpus)
    for (const auto& utt : inst.dialogue.utterances)
      for (const auto& tok : utt.tokens)
        if (seen.insert(tok).second) vocab.push_back(tok);
  Rng rng(seed);
  return EmbeddingTable::random_init(vocab, dim, rng);
}

ModelConfig small_config(DecoderKind kind) {
  ModelConfig config;
  config.decoder = kind;
  config.emb_dim = 8;
  config.lstm_hidden = 8;
  config.d_model = 16;
  config.heads = 2;
  config.d_k = 8;
  config.d_v = 8;
  config.pointer_hidden = 12;
  return config;
}

}  // namespace

TEST_CASE("binary_nll analytic values") {
  Tape tape;
  Var half = tape.input(Tensor::scalar(0.5));
  CHECK(binary_nll(half, true).value().value() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Tape tape2;
  Var sure = tape2.input(Tensor::scalar(1.0));
  CHECK(binary_nll(sure, true).value().value() <= 1e-11);

  Tape tape3;
  Var p9 = tape3.input(Tensor::scalar(0.9));
  Var p1 = tape3.input(Tensor::scalar(0.1));
  const double loss = binary_nll(p9, true).value().value() +
                      binary_nll(p1, false).value().value();
  CHECK(loss == doctest::Approx(-2.0 * std::log(0.9)).epsilon(1e-12));
  CHECK(loss == doctest::Approx(0.210721).epsilon(1e-5));
}

TEST_CASE("training rejects an empty dataset") {
  SynthConfig sc;
  sc.n_dialogues = 5;
  const SynthCorpus corpus = synth_generate(sc);
  CarryoverModel model = CarryoverModel::create(
      small_config(DecoderKind::Independent),
      vocab_table(corpus.train, 8, 1), 1);
  TrainConfig tc;
  CHECK_THROWS_AS(train(model, tc, {}, {}), EmptyDataset);
}

TEST_CASE("a tiny corpus is overfit to perfect train F1") {
  SynthConfig sc;
  sc.n_dialogues = 4;
  sc.seed = 5;
  const SynthCorpus corpus = synth_generate(sc);

  CarryoverModel model = CarryoverModel::create(
      small_config(DecoderKind::Independent),
      vocab_table(corpus.train, 8, 5), 5);

  TrainConfig tc;
  tc.seed = 5;
  tc.epochs = 200;
  tc.batch_size = 4;
  tc.dropout = 0.0;
  tc.ordering = {OrderingMode::TemporalOrder, 5};
  tc.early_stop_dev_f1 = 1.0;
  const TrainHistory history = train(model, tc, corpus.train, corpus.train);

  const EvalReport report = corpus_eval(model, corpus.train, internal_preset(),
                                        tc.ordering);
  CHECK(report.overall.f1 == doctest::Approx(1.0));
  CHECK(history.best_epoch >= 0);

  // bucket counts sum to the candidates inside the bucketed range
  long bucketed = 0, in_range = 0;
  for (const auto& [label, stats] : report.by_distance)
    if (label != internal_preset().aggregate.label) bucketed += stats.total;
  for (const CarryoverInstance& inst : corpus.train)
    for (const CandidateSlot& c : inst.candidates)
      if (c.source.distance >= 1) in_range += 1;
  CHECK(bucketed == in_range);
}

TEST_CASE("training is bit-reproducible under a fixed seed") {
  SynthConfig sc;
  sc.n_dialogues = 6;
  sc.seed = 9;
  const SynthCorpus corpus = synth_generate(sc);

  auto run = [&]() {
    CarryoverModel model = CarryoverModel::create(
        small_config(DecoderKind::Transformer),
        vocab_table(corpus.train, 8, 9), 9);
    TrainConfig tc;
    tc.seed = 9;
    tc.epochs = 3;
    tc.batch_size = 3;
    tc.ordering = {OrderingMode::TemporalOrder, 9};
    return std::make_pair(train(model, tc, corpus.train, corpus.dev),
                          model.snapshot());
  };

  const auto [hist_a, snap_a] = run();
  const auto [hist_b, snap_b] = run();

  REQUIRE(hist_a.epochs.size() == hist_b.epochs.size());
  for (std::size_t e = 0; e < hist_a.epochs.size(); ++e) {
    CHECK(hist_a.epochs[e].train_loss == hist_b.epochs[e].train_loss);
    CHECK(hist_a.epochs[e].dev_f1 == hist_b.epochs[e].dev_f1);
  }
  REQUIRE(snap_a.model_values.size() == snap_b.model_values.size());
  for (std::size_t t = 0; t < snap_a.model_values.size(); ++t)
    for (Index i = 0; i < snap_a.model_values[t].size(); ++i)
      CHECK(snap_a.model_values[t][i] == snap_b.model_values[t][i]);
}

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "carryover/checkpoint.hpp"
#include "carryover/corpus.hpp"
#include "carryover/gradcheck.hpp"
#include "carryover/synth.hpp"
#include "carryover/train.hpp"

namespace fs = std::filesystem;
using namespace carryover;
using nlohmann::json;

namespace {

int log_level() {
  const char* env = std::getenv("CARRYOVER_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "0" || v == "quiet") return 0;
  if (v == "2" || v == "debug") return 2;
  return 1;
}

std::vector<CarryoverInstance> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus '" + path + "'");
  return parse_corpus(in);
}

void write_corpus(const std::vector<CarryoverInstance>& instances,
                  const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  serialize_corpus(instances, out);
}

BucketPreset preset_by_name(const std::string& name) {
  if (name == "internal") return internal_preset();
  if (name == "dstc2") return dstc2_preset();
  throw ParseError("unknown bucket preset '" + name + "'");
}

EmbeddingTable make_embeddings(const std::string& vectors_path,
                               const std::vector<CarryoverInstance>& corpus,
                               Index emb_dim, std::uint64_t seed) {
  if (!vectors_path.empty()) {
    std::ifstream in(vectors_path);
    if (!in) throw ParseError("cannot open embeddings '" + vectors_path + "'");
    return EmbeddingTable::load_vectors(in);
  }
  std::vector<std::string> vocab;
  std::set<std::string> seen;
  auto add = [&](const std::string& tok) {
    if (seen.insert(tok).second) vocab.push_back(tok);
  };
  for (const CarryoverInstance& inst : corpus) {
    for (const Utterance& utt : inst.dialogue.utterances)
      for (const std::string& tok : utt.tokens) add(tok);
    for (const std::string& tok : inst.dialogue.current_intent.tokens)
      add(to_lower(tok));
    for (const CandidateSlot& c : inst.candidates) add(c.mapped_key);
  }
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  return EmbeddingTable::random_init(vocab, emb_dim, rng);
}

int run_train(const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& decoder,
              const std::string& ordering, std::uint64_t seed, int epochs,
              const std::string& preset_name, const std::string& embeddings,
              const std::string& out_dir) {
  ModelConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ParseError("cannot open config '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    config = config_from_json(buf.str());
  }
  if (!decoder.empty()) config.decoder = decoder_from_string(decoder);

  const auto train_set = read_corpus(train_path);
  const auto dev_set =
      dev_path.empty() ? std::vector<CarryoverInstance>{} : read_corpus(dev_path);

  CarryoverModel model = CarryoverModel::create(
      config, make_embeddings(embeddings, train_set, config.emb_dim, seed),
      seed);

  TrainConfig tc;
  tc.seed = seed;
  tc.epochs = epochs > 0 ? epochs : default_epochs(config.decoder);
  tc.ordering = OrderingPolicy{ordering_from_string(ordering), seed};
  tc.preset = preset_by_name(preset_name);
  tc.dropout = config.dropout;

  if (log_level() >= 1)
    std::cerr << "training " << to_string(config.decoder) << " for "
              << tc.epochs << " epochs on " << train_set.size()
              << " dialogues\n";
  const TrainHistory history = train(model, tc, train_set, dev_set);
  if (log_level() >= 2) {
    for (std::size_t e = 0; e < history.epochs.size(); ++e)
      std::cerr << "epoch " << e << "  loss " << history.epochs[e].train_loss
                << "  dev_f1 " << history.epochs[e].dev_f1 << "\n";
  }

  fs::create_directories(out_dir);
  save_checkpoint(model, (fs::path(out_dir) / "model.ckpt").string());
  json hist;
  hist["best_epoch"] = history.best_epoch;
  hist["epochs"] = json::array();
  for (const EpochStats& e : history.epochs)
    hist["epochs"].push_back(
        {{"train_loss", e.train_loss}, {"dev_f1", e.dev_f1}});
  std::ofstream hout(fs::path(out_dir) / "history.json");
  hout << hist.dump(2) << "\n";
  if (log_level() >= 1)
    std::cerr << "best epoch " << history.best_epoch << ", checkpoint in "
              << out_dir << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& test_path,
             const std::string& ordering, const std::string& preset_name,
             const std::string& out_path) {
  CarryoverModel model = load_checkpoint(ckpt_path);
  const auto test_set = read_corpus(test_path);
  const OrderingPolicy policy{ordering_from_string(ordering), 0};
  const EvalReport report =
      corpus_eval(model, test_set, preset_by_name(preset_name), policy);
  std::cout << report_table(report);
  std::cout << "overall  P " << report.overall.precision << "  R "
            << report.overall.recall << "  F1 " << report.overall.f1 << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw ParseError("cannot open '" + out_path + "' for writing");
    out << report_json(report) << "\n";
  }
  return 0;
}

int run_predict(const std::string& ckpt_path, const std::string& input_path,
                const std::string& ordering) {
  CarryoverModel model = load_checkpoint(ckpt_path);
  const auto instances = read_corpus(input_path);
  const OrderingPolicy policy{ordering_from_string(ordering), 0};
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Prediction pred = model.predict(instances[i], policy);
    json out;
    out["record"] = i;
    json slots = json::array();
    for (std::size_t j : pred.selected) {
      const CandidateSlot& c = instances[i].candidates[j];
      slots.push_back({{"key", c.mapped_key},
                       {"distance", c.source.distance},
                       {"span", {c.source.span_left, c.source.span_right}}});
    }
    out["carried"] = slots;
    std::cout << out.dump() << "\n";
  }
  return 0;
}

int run_synth(const SynthConfig& config, const std::string& out_dir) {
  const SynthCorpus corpus = synth_generate(config);
  fs::create_directories(out_dir);
  write_corpus(corpus.train, fs::path(out_dir) / "train.jsonl");
  write_corpus(corpus.dev, fs::path(out_dir) / "dev.jsonl");
  write_corpus(corpus.test, fs::path(out_dir) / "test.jsonl");
  if (log_level() >= 1) {
    const CorpusStats stats = compute_stats(corpus.train);
    std::cerr << "wrote " << corpus.train.size() << "/" << corpus.dev.size()
              << "/" << corpus.test.size() << " dialogues to " << out_dir
              << " (" << stats.total_candidates()
              << " train candidates)\n";
  }
  return 0;
}

int run_gradcheck(std::uint64_t seed, double tolerance) {
  SynthConfig sc;
  sc.n_dialogues = 3;
  sc.seed = seed;
  const SynthCorpus corpus = synth_generate(sc);

  double worst_overall = 0.0;
  for (DecoderKind kind : {DecoderKind::Independent, DecoderKind::Pointer,
                           DecoderKind::Transformer}) {
    ModelConfig config;
    config.decoder = kind;
    config.emb_dim = 5;
    config.lstm_hidden = 4;
    config.d_model = 8;
    config.heads = 2;
    config.d_k = 4;
    config.d_v = 4;
    config.pointer_hidden = 6;
    CarryoverModel model = CarryoverModel::create(
        config, make_embeddings("", corpus.train, config.emb_dim, seed), seed);
    const OrderingPolicy policy{OrderingMode::TemporalOrder, seed};
    double worst = 0.0;
    for (const CarryoverInstance& inst : corpus.train)
      worst = std::max(worst, model_gradcheck(model, inst, policy));
    std::cout << to_string(kind) << "  max rel err " << worst << "\n";
    worst_overall = std::max(worst_overall, worst);
  }
  std::cout << (worst_overall <= tolerance ? "gradcheck passed\n"
                                           : "gradcheck FAILED\n");
  return worst_overall <= tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slot carryover models for multi-turn dialogue"};
  app.require_subcommand(1);

  std::string config_path, train_path, dev_path, test_path, decoder;
  std::string ordering = "temporal";
  std::string preset_name = "internal";
  std::string embeddings, out_dir = "out", out_path, ckpt_path, input_path;
  std::uint64_t seed = 1;
  int epochs = 0;

  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--config", config_path, "model config (JSON)");
  train_cmd->add_option("--train", train_path, "training corpus")->required();
  train_cmd->add_option("--dev", dev_path, "dev corpus");
  train_cmd->add_option("--decoder", decoder,
                        "independent | pointer | transformer");
  train_cmd->add_option("--ordering", ordering, "none | turn | temporal");
  train_cmd->add_option("--seed", seed, "random seed");
  train_cmd->add_option("--epochs", epochs, "epoch budget (0 = default)");
  train_cmd->add_option("--bucket-preset", preset_name, "internal | dstc2");
  train_cmd->add_option("--embeddings", embeddings,
                        "pretrained vector file (optional)");
  train_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ckpt_path, "model checkpoint")
      ->required();
  eval_cmd->add_option("--test", test_path, "test corpus")->required();
  eval_cmd->add_option("--ordering", ordering, "none | turn | temporal");
  eval_cmd->add_option("--bucket-preset", preset_name, "internal | dstc2");
  eval_cmd->add_option("--out", out_path, "machine-readable report path");

  CLI::App* predict_cmd =
      app.add_subcommand("predict", "predict carried slots");
  predict_cmd->add_option("--checkpoint", ckpt_path, "model checkpoint")
      ->required();
  predict_cmd->add_option("--input", input_path, "corpus with records to tag")
      ->required();
  predict_cmd->add_option("--ordering", ordering, "none | turn | temporal");

  SynthConfig synth_config;
  double rho = 1.0;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("--n-dialogues", synth_config.n_dialogues);
  synth_cmd->add_option("--max-turns", synth_config.max_turns);
  synth_cmd->add_option("--vocab-size", synth_config.vocab_size);
  synth_cmd->add_option("--domains", synth_config.n_domains);
  synth_cmd->add_option("--keys-per-domain", synth_config.keys_per_domain);
  synth_cmd->add_option("--slots-per-type", synth_config.slots_per_type);
  synth_cmd->add_option("--rho", rho, "pair carryover correlation");
  synth_cmd->add_option("--long-distance-rate",
                        synth_config.long_distance_rate);
  synth_cmd->add_option("--pair-drop-rate", synth_config.pair_drop_rate);
  synth_cmd->add_option("--seed", synth_config.seed);
  synth_cmd->add_option("--out", out_dir, "output directory");

  double tolerance = 1e-4;
  CLI::App* grad_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient suite");
  grad_cmd->add_option("--seed", seed);
  grad_cmd->add_option("--tolerance", tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(train_cmd))
      return run_train(config_path, train_path, dev_path, decoder, ordering,
                       seed, epochs, preset_name, embeddings, out_dir);
    if (app.got_subcommand(eval_cmd))
      return run_eval(ckpt_path, test_path, ordering, preset_name, out_path);
    if (app.got_subcommand(predict_cmd))
      return run_predict(ckpt_path, input_path, ordering);
    if (app.got_subcommand(synth_cmd)) {
      for (CorrelatedPair& p : synth_config.pairs) p.rho = rho;
      return run_synth(synth_config, out_dir);
    }
    if (app.got_subcommand(grad_cmd)) return run_gradcheck(seed, tolerance);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include "carryover/synth.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "carryover/errors.hpp"
#include "carryover/rng.hpp"

namespace carryover {

namespace {

struct Mention {
  std::string key;
  int distance = 0;
  std::vector<std::string> value;  // 1-2 value tokens
  bool positive = false;
  bool in_candidates = true;
};

void check_config(const SynthConfig& cfg) {
  if (cfg.n_dialogues < 1) throw DomainError("n_dialogues must be >= 1");
  if (cfg.max_turns < 3) throw DomainError("max_turns must be >= 3");
  if (cfg.vocab_size < 1) throw DomainError("vocab_size must be >= 1");
  if (cfg.n_domains < 1) throw DomainError("n_domains must be >= 1");
  if (cfg.keys_per_domain < 2)
    throw DomainError("keys_per_domain must be >= 2");
  if (cfg.long_distance_rate < 0.0 || cfg.long_distance_rate > 1.0)
    throw InvalidRate("long_distance_rate outside [0, 1]");
  if (cfg.pair_drop_rate < 0.0 || cfg.pair_drop_rate > 1.0)
    throw InvalidRate("pair_drop_rate outside [0, 1]");
  for (const CorrelatedPair& p : cfg.pairs) {
    if (p.rho < 0.0 || p.rho > 1.0) throw InvalidRate("rho outside [0, 1]");
    if (p.key_a.empty() || p.key_b.empty()) throw EmptyKey();
  }
}

std::vector<std::string> value_tokens(const SynthConfig& cfg, Rng& rng) {
  const int n = 1 + static_cast<int>(rng.below(2));
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    out.push_back("v" + std::to_string(rng.below(
                            static_cast<std::uint64_t>(cfg.vocab_size))));
  return out;
}

// Context positives sit at distance >= 3 with probability long_distance_rate.
int draw_distance(const SynthConfig& cfg, int max_d, Rng& rng) {
  if (max_d >= 3 && rng.bernoulli(cfg.long_distance_rate))
    return 3 + static_cast<int>(rng.below(
                   static_cast<std::uint64_t>(max_d - 2)));
  return 1 + static_cast<int>(rng.below(
                 static_cast<std::uint64_t>(std::min(2, max_d))));
}

CarryoverInstance make_dialogue(const SynthConfig& cfg, Rng& rng,
                                const std::vector<std::string>& carry_keys,
                                const std::vector<std::string>& distr_keys,
                                const std::vector<std::string>& dup_keys) {
  const int domain_id = static_cast<int>(
      rng.below(static_cast<std::uint64_t>(cfg.n_domains)));
  const std::string domain = "dom" + std::to_string(domain_id);
  const int max_d = cfg.max_turns - 1;

  std::vector<Mention> mentions;

  // Anchor: the current-turn slot, always carried.
  Mention anchor{"anchor", 0, value_tokens(cfg, rng), true, true};

  // Correlated pairs: both keys of each pair in one context turn; a cue
  // token in the current turn reveals the shared carry coin. key_a
  // sometimes leaves the candidate list (text unchanged); key_b is carried
  // only when key_a is still a candidate. Pairs are placed in rotated order
  // so no pair is always first.
  bool cue_carry = false;
  if (!cfg.pairs.empty()) {
    const std::size_t start = rng.below(cfg.pairs.size());
    for (std::size_t k = 0; k < cfg.pairs.size(); ++k) {
      const CorrelatedPair& pair =
          cfg.pairs[(start + k) % cfg.pairs.size()];
      const int dp = draw_distance(cfg, max_d, rng);
      if (k == 0) cue_carry = rng.bernoulli(0.5);
      const bool joint = rng.bernoulli(pair.rho);
      const bool a_present = !rng.bernoulli(cfg.pair_drop_rate);
      const bool a_label = cue_carry;
      const bool b_coin = joint ? cue_carry : rng.bernoulli(0.5);
      const bool b_label = b_coin && a_present;
      mentions.push_back(
          {pair.key_a, dp, value_tokens(cfg, rng), a_label, a_present});
      mentions.push_back(
          {pair.key_b, dp, value_tokens(cfg, rng), b_label, true});
    }
  }

  // Always-carried and never-carried keys, sampled without replacement.
  auto pick_keys = [&](const std::vector<std::string>& pool) {
    std::vector<std::string> keys = pool;
    rng.shuffle(keys);
    const std::size_t want = std::min<std::size_t>(
        keys.size(), static_cast<std::size_t>(std::max(0, cfg.slots_per_type)));
    keys.resize(want);
    return keys;
  };
  for (const std::string& key : pick_keys(carry_keys)) {
    mentions.push_back(
        {key, draw_distance(cfg, max_d, rng), value_tokens(cfg, rng), true,
         true});
  }
  for (const std::string& key : pick_keys(distr_keys)) {
    const int d = 1 + static_cast<int>(rng.below(
                          static_cast<std::uint64_t>(max_d)));
    mentions.push_back({key, d, value_tokens(cfg, rng), false, true});
  }

  // Keys mentioned at two distances: only the nearer value is carried.
  if (max_d >= 2) {
    for (const std::string& key : pick_keys(dup_keys)) {
      int near = draw_distance(cfg, std::max(1, max_d - 1), rng);
      near = std::min(near, max_d - 1);
      const int far =
          near + 1 +
          static_cast<int>(
              rng.below(static_cast<std::uint64_t>(max_d - near)));
      mentions.push_back({key, near, value_tokens(cfg, rng), true, true});
      mentions.push_back({key, far, value_tokens(cfg, rng), false, true});
    }
  }

  // Lay out turns: distance d lives d turns before the current user turn,
  // so even distances are user turns and odd ones are agent turns.
  int n_turns = 1;
  for (const Mention& m : mentions) n_turns = std::max(n_turns, m.distance + 1);
  if (n_turns % 2 == 0) ++n_turns;  // keep the oldest turn a user turn

  std::vector<std::vector<std::string>> texts(n_turns);
  for (auto& text : texts) {
    const int fillers = 1 + static_cast<int>(rng.below(2));
    for (int i = 0; i < fillers; ++i)
      text.push_back("w" + std::to_string(rng.below(
                               static_cast<std::uint64_t>(cfg.vocab_size))));
  }
  texts.back().push_back(cue_carry ? "cue_carry" : "cue_skip");

  struct Placed {
    Mention mention;
    int span_left = 0;
    int span_right = 0;
  };
  std::vector<Placed> placed;
  auto place = [&](const Mention& m) {
    std::vector<std::string>& text = texts[n_turns - 1 - m.distance];
    text.push_back(m.key);
    const int left = static_cast<int>(text.size());
    text.insert(text.end(), m.value.begin(), m.value.end());
    placed.push_back(
        {m, left, left + static_cast<int>(m.value.size()) - 1});
  };
  place(anchor);
  for (const Mention& m : mentions) place(m);

  std::vector<std::pair<Speaker, std::vector<std::string>>> turns;
  for (int t = 0; t < n_turns; ++t) {
    const int distance = n_turns - 1 - t;
    turns.emplace_back(
        distance % 2 == 0 ? Speaker::User : Speaker::Agent, texts[t]);
  }

  CarryoverInstance inst;
  inst.dialogue =
      build_dialogue(turns, Intent{{"GetDom" + std::to_string(domain_id)}});

  std::vector<Placed> candidates;
  for (const Placed& p : placed)
    if (p.mention.in_candidates) candidates.push_back(p);
  rng.shuffle(candidates);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const Placed& p = candidates[j];
    inst.candidates.push_back(CandidateSlot{
        Slot{p.mention.distance, p.mention.key, p.span_left, p.span_right},
        p.mention.key, domain});
    if (p.mention.positive) inst.labels.insert(j);
  }
  validate_instance(inst);
  return inst;
}

}  // namespace

SynthCorpus synth_generate(const SynthConfig& cfg) {
  check_config(cfg);

  // Key inventory: anchor + configured pair keys, the rest cycled over the
  // three behavior classes.
  std::vector<std::string> carry_keys, distr_keys, dup_keys;
  const int reserved = 1 + 2 * static_cast<int>(cfg.pairs.size());
  for (int j = reserved; j < cfg.keys_per_domain; ++j) {
    const std::string name = std::to_string(j - reserved);
    switch ((j - reserved) % 3) {
      case 0: carry_keys.push_back("carry" + name); break;
      case 1: distr_keys.push_back("distr" + name); break;
      default: dup_keys.push_back("dup" + name); break;
    }
  }

  Rng rng(cfg.seed);
  std::vector<CarryoverInstance> all;
  for (int i = 0; i < cfg.n_dialogues; ++i)
    all.push_back(make_dialogue(cfg, rng, carry_keys, distr_keys, dup_keys));

  SynthCorpus corpus;
  const std::size_t n = all.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_dev = n / 10;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train)
      corpus.train.push_back(std::move(all[i]));
    else if (i < n_train + n_dev)
      corpus.dev.push_back(std::move(all[i]));
    else
      corpus.test.push_back(std::move(all[i]));
  }
  return corpus;
}

}  // namespace carryover

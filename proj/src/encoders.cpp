#include "carryover/encoders.hpp"

#include <algorithm>
#include <cctype>

#include "carryover/errors.hpp"

namespace carryover {

LstmParams make_lstm(ParameterStore& store, const std::string& prefix,
                     Index input_dim, Index hidden, Rng& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.w_x = &store.create_glorot(prefix + "/w_x", 4 * hidden, input_dim, rng);
  p.w_h = &store.create_glorot(prefix + "/w_h", 4 * hidden, hidden, rng);
  p.b = &store.create_zeros(prefix + "/b", {4 * hidden});
  for (Index i = hidden; i < 2 * hidden; ++i) p.b->value[i] = 1.0;
  return p;
}

LstmVars bind_lstm(Tape& tape, const LstmParams& p) {
  return LstmVars{tape.leaf(*p.w_x), tape.leaf(*p.w_h), tape.leaf(*p.b),
                  p.hidden};
}

LstmState lstm_zero_state(Tape& tape, Index hidden) {
  return LstmState{tape.input(Tensor({hidden})), tape.input(Tensor({hidden}))};
}

LstmState lstm_cell_step(Var x, const LstmState& prev, const LstmVars& w) {
  Var pre = add(add(matmul(w.w_x, x), matmul(w.w_h, prev.h)), w.b);
  const Index h = w.hidden;
  Var gi = sigmoid(slice(pre, 0, h));
  Var gf = sigmoid(slice(pre, h, h));
  Var gg = tanh_op(slice(pre, 2 * h, h));
  Var go = sigmoid(slice(pre, 3 * h, h));
  Var c = add(mul(gf, prev.c), mul(gi, gg));
  Var hh = mul(go, tanh_op(c));
  return LstmState{hh, c};
}

std::vector<LstmState> run_lstm(const std::vector<Var>& inputs, LstmState init,
                                const LstmVars& w) {
  std::vector<LstmState> states;
  states.reserve(inputs.size());
  LstmState s = init;
  for (Var x : inputs) {
    s = lstm_cell_step(x, s, w);
    states.push_back(s);
  }
  return states;
}

BiLstmParams make_bilstm(ParameterStore& store, const std::string& prefix,
                         Index input_dim, Index hidden, Rng& rng) {
  return BiLstmParams{make_lstm(store, prefix + "/fwd", input_dim, hidden, rng),
                      make_lstm(store, prefix + "/bwd", input_dim, hidden, rng)};
}

DialogueEncoding encode_dialogue(Tape& tape, EmbeddingTable& table,
                                 const Dialogue& dialogue,
                                 const BiLstmParams& weights) {
  // Serialized stream with (utterance index, token index) bookkeeping so
  // separator states can be dropped afterwards.
  struct Pos {
    int utt;  // -1 for separator
    int tok;
  };
  std::vector<Var> stream;
  std::vector<Pos> positions;
  for (std::size_t u = 0; u < dialogue.utterances.size(); ++u) {
    const Utterance& utt = dialogue.utterances[u];
    if (u > 0) {
      const char* sep = utt.speaker == Speaker::User ? kUserSeparator
                                                     : kAgentSeparator;
      stream.push_back(table.embed(tape, sep));
      positions.push_back(Pos{-1, 0});
    }
    for (std::size_t i = 0; i < utt.tokens.size(); ++i) {
      stream.push_back(table.embed(tape, utt.tokens[i]));
      positions.push_back(Pos{static_cast<int>(u), static_cast<int>(i)});
    }
  }

  LstmVars fw = bind_lstm(tape, weights.fwd);
  LstmVars bw = bind_lstm(tape, weights.bwd);
  std::vector<LstmState> fwd_states =
      run_lstm(stream, lstm_zero_state(tape, fw.hidden), fw);
  std::vector<Var> reversed(stream.rbegin(), stream.rend());
  std::vector<LstmState> bwd_rev =
      run_lstm(reversed, lstm_zero_state(tape, bw.hidden), bw);

  DialogueEncoding out;
  out.token_states.resize(dialogue.utterances.size());
  const std::size_t n = stream.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (positions[i].utt < 0) continue;
    Var state = concat({fwd_states[i].h, bwd_rev[n - 1 - i].h});
    out.token_states[static_cast<std::size_t>(positions[i].utt)].push_back(
        state);
  }
  out.context = concat({fwd_states.back().h, bwd_rev.back().h});
  return out;
}

std::vector<std::string> split_key(const std::string& key) {
  if (key.empty()) throw EmptyKey();
  std::vector<std::string> parts;
  std::string cur;
  auto flush = [&]() {
    if (!cur.empty()) {
      parts.push_back(to_lower(cur));
      cur.clear();
    }
  };
  for (std::size_t i = 0; i < key.size(); ++i) {
    const char c = key[i];
    if (c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c)) && i > 0 &&
        std::islower(static_cast<unsigned char>(key[i - 1]))) {
      flush();
    }
    cur.push_back(c);
  }
  flush();
  return parts;
}

Var encode_slot_key(Tape& tape, EmbeddingTable& table, const std::string& key) {
  std::vector<std::string> parts = split_key(key);
  if (parts.empty()) throw EmptyKey();
  return table.embed_avg(tape, parts);
}

Var encode_slot_value_avg(Tape& tape, EmbeddingTable& table,
                          const Dialogue& dialogue, const Slot& slot) {
  return table.embed_avg(tape, slot_value_tokens(dialogue, slot));
}

Var encode_slot_value_ctx(const DialogueEncoding& encoding,
                          const Dialogue& dialogue, const Slot& slot) {
  const std::size_t n = dialogue.utterances.size();
  if (slot.distance < 0 || slot.distance >= static_cast<int>(n))
    throw DistanceOutOfRange("slot distance " + std::to_string(slot.distance));
  const std::size_t u = n - 1 - static_cast<std::size_t>(slot.distance);
  const auto& states = encoding.token_states[u];
  if (slot.span_left < 0 || slot.span_left > slot.span_right ||
      slot.span_right >= static_cast<int>(states.size()))
    throw SpanOutOfRange("span outside encoded utterance");
  Var acc = states[static_cast<std::size_t>(slot.span_left)];
  for (int i = slot.span_left + 1; i <= slot.span_right; ++i)
    acc = add(acc, states[static_cast<std::size_t>(i)]);
  return scale(acc, 1.0 / static_cast<double>(slot.span_right -
                                              slot.span_left + 1));
}

Var encode_distance(Tape& tape, Parameter& table, int d, bool trainable) {
  if (d < 0) throw NegativeDistance();
  const Index d_max = table.value.rows() - 1;
  const Index row = std::min<Index>(d, d_max);
  Var t = trainable ? tape.leaf(table) : tape.input(table.value);
  return get_row(t, row);
}

SlotEncoding assemble_slot_encoding(Var x_key, Var x_val, Var x_dist) {
  if (x_key.value().rank() != 1 || x_val.value().rank() != 1 ||
      x_dist.value().rank() != 1 || x_dist.value().dim(0) != kDistanceDim)
    throw ShapeMismatch("slot encoding parts: key/val rank 1, dist length 4");
  return SlotEncoding{x_key, x_val, x_dist, concat({x_key, x_val, x_dist})};
}

Var encode_intent(Tape& tape, EmbeddingTable& table, const Intent& intent) {
  std::vector<std::string> parts;
  for (const auto& tok : intent.tokens) {
    for (auto& p : split_key(tok)) parts.push_back(std::move(p));
  }
  if (parts.empty()) throw EmptyIntent();
  return table.embed_avg(tape, parts);
}

}  // namespace carryover

#include "carryover/model.hpp"

#include <algorithm>
#include <cmath>

#include "carryover/errors.hpp"

namespace carryover {

namespace {
constexpr double kProbEps = 1e-12;
constexpr double kMaskedScore = -1e9;
}  // namespace

CarryoverModel CarryoverModel::create(ModelConfig cfg,
                                      EmbeddingTable embeddings,
                                      std::uint64_t seed) {
  CarryoverModel m(cfg, std::move(embeddings));
  Rng rng(seed);
  m.embeddings_.ensure(kUserSeparator, rng);
  m.embeddings_.ensure(kAgentSeparator, rng);

  ParameterStore& ps = m.params_;
  m.distance_table_ = &ps.create_glorot(
      "dist_table", static_cast<Index>(cfg.d_max) + 1, kDistanceDim, rng);
  m.dialogue_bilstm_ =
      make_bilstm(ps, "dialogue_bilstm", cfg.emb_dim, cfg.lstm_hidden, rng);

  switch (cfg.decoder) {
    case DecoderKind::Independent: {
      m.mlp_w1_ = &ps.create_glorot("mlp/w1", cfg.d_model, cfg.cond_dim(), rng);
      m.mlp_b1_ = &ps.create_zeros("mlp/b1", {cfg.d_model});
      m.mlp_w2_ = &ps.create_uniform_vec("mlp/w2", cfg.d_model, rng);
      m.mlp_b2_ = &ps.create_zeros("mlp/b2", {});
      break;
    }
    case DecoderKind::Pointer: {
      const Index p = cfg.pointer_hidden;
      m.ptr_enc_ = make_lstm(ps, "ptr_enc", cfg.slot_dim(), p, rng);
      m.ptr_dec_ = make_lstm(ps, "ptr_dec", cfg.slot_dim(), p, rng);
      const Index init_in = p + cfg.context_dim() + cfg.emb_dim;
      m.ptr_init_w_ = &ps.create_glorot("ptr_init/w", p, init_in, rng);
      m.ptr_init_b_ = &ps.create_zeros("ptr_init/b", {p});
      m.attn_wm_ = &ps.create_glorot("attn/wm", p, p, rng);
      m.attn_ws_ = &ps.create_glorot("attn/ws", p, p, rng);
      m.attn_v_ = &ps.create_uniform_vec("attn/v", p, rng);
      m.end_sentinel_ = &ps.create_uniform_vec("end_sentinel", p, rng);
      m.start_input_ = &ps.create_uniform_vec("start_input", cfg.slot_dim(), rng);
      break;
    }
    case DecoderKind::Transformer: {
      m.proj_w_ = &ps.create_glorot("proj/w", cfg.cond_dim(), cfg.d_model, rng);
      m.proj_b_ = &ps.create_zeros("proj/b", {cfg.d_model});
      for (Index l = 0; l < cfg.layers; ++l) {
        const std::string pfx = "layer" + std::to_string(l);
        TransformerLayer layer;
        layer.wq = &ps.create_glorot(pfx + "/wq", cfg.d_model,
                                     cfg.heads * cfg.d_k, rng);
        layer.wk = &ps.create_glorot(pfx + "/wk", cfg.d_model,
                                     cfg.heads * cfg.d_k, rng);
        layer.wv = &ps.create_glorot(pfx + "/wv", cfg.d_model,
                                     cfg.heads * cfg.d_v, rng);
        layer.wo = &ps.create_glorot(pfx + "/wo", cfg.heads * cfg.d_v,
                                     cfg.d_model, rng);
        layer.ln1_g = &ps.create(pfx + "/ln1_g", {cfg.d_model});
        layer.ln1_g->value.flat().setOnes();
        layer.ln1_b = &ps.create_zeros(pfx + "/ln1_b", {cfg.d_model});
        layer.ff_w1 = &ps.create_glorot(pfx + "/ff_w1", cfg.d_model, cfg.ff(),
                                        rng);
        layer.ff_b1 = &ps.create_zeros(pfx + "/ff_b1", {cfg.ff()});
        layer.ff_w2 = &ps.create_glorot(pfx + "/ff_w2", cfg.ff(), cfg.d_model,
                                        rng);
        layer.ff_b2 = &ps.create_zeros(pfx + "/ff_b2", {cfg.d_model});
        layer.ln2_g = &ps.create(pfx + "/ln2_g", {cfg.d_model});
        layer.ln2_g->value.flat().setOnes();
        layer.ln2_b = &ps.create_zeros(pfx + "/ln2_b", {cfg.d_model});
        m.layers_.push_back(layer);
      }
      m.out_w_ = &ps.create_uniform_vec("out/w", cfg.d_model, rng);
      m.out_b_ = &ps.create_zeros("out/b", {});
      break;
    }
  }
  return m;
}

CarryoverModel::Encoded CarryoverModel::encode_all(
    Tape& tape, const CarryoverInstance& instance) {
  Encoded enc;
  DialogueEncoding denc =
      encode_dialogue(tape, embeddings_, instance.dialogue, dialogue_bilstm_);
  enc.context = denc.context;
  enc.intent = encode_intent(tape, embeddings_, instance.dialogue.current_intent);
  for (const CandidateSlot& cand : instance.candidates) {
    Var x_key = encode_slot_key(tape, embeddings_, cand.mapped_key);
    Var x_val =
        config_.value_encoding == ValueEncoding::Ctx
            ? encode_slot_value_ctx(denc, instance.dialogue, cand.source)
            : encode_slot_value_avg(tape, embeddings_, instance.dialogue,
                                    cand.source);
    Var x_dist = encode_distance(tape, *distance_table_, cand.source.distance);
    enc.slots.push_back(assemble_slot_encoding(x_key, x_val, x_dist).full);
  }
  return enc;
}

// Per-slot carryover probabilities, aligned with `order` (the j-th output
// scores candidate order[j]).
std::vector<Var> CarryoverModel::slot_probs(Tape& tape, const Encoded& enc,
                                            const std::vector<std::size_t>& order,
                                            DropoutMode mode, Rng* rng) {
  std::vector<Var> probs;
  if (order.empty()) return probs;

  if (config_.decoder == DecoderKind::Independent) {
    Var w1 = tape.leaf(*mlp_w1_);
    Var b1 = tape.leaf(*mlp_b1_);
    Var w2 = tape.leaf(*mlp_w2_);
    Var b2 = tape.leaf(*mlp_b2_);
    for (std::size_t j : order) {
      Var z = concat({enc.slots[j], enc.context, enc.intent});
      Var hidden = tanh_op(add(matmul(w1, z), b1));
      hidden = dropout(hidden, config_.dropout, mode, rng);
      probs.push_back(sigmoid(add(dot(w2, hidden), b2)));
    }
    return probs;
  }

  // Transformer: slot tokens carry c and i by concatenation so attention
  // stays purely slot-to-slot.
  std::vector<Var> tokens;
  Var proj_w = tape.leaf(*proj_w_);
  Var proj_b = tape.leaf(*proj_b_);
  for (std::size_t j : order)
    tokens.push_back(concat({enc.slots[j], enc.context, enc.intent}));
  Var x = add_rowwise(matmul(stack_rows(tokens), proj_w), proj_b);

  for (const TransformerLayer& layer : layers_) {
    Var attn = multihead_self_attention(
        x, tape.leaf(*layer.wq), tape.leaf(*layer.wk), tape.leaf(*layer.wv),
        tape.leaf(*layer.wo), config_.heads, config_.d_k, config_.d_v);
    attn = dropout(attn, config_.dropout, mode, rng);
    x = layer_norm(add(x, attn), tape.leaf(*layer.ln1_g),
                   tape.leaf(*layer.ln1_b));
    Var ff = add_rowwise(matmul(x, tape.leaf(*layer.ff_w1)),
                         tape.leaf(*layer.ff_b1));
    ff = add_rowwise(matmul(relu(ff), tape.leaf(*layer.ff_w2)),
                     tape.leaf(*layer.ff_b2));
    ff = dropout(ff, config_.dropout, mode, rng);
    x = layer_norm(add(x, ff), tape.leaf(*layer.ln2_g),
                   tape.leaf(*layer.ln2_b));
  }

  Var out_w = tape.leaf(*out_w_);
  Var out_b = tape.leaf(*out_b_);
  for (std::size_t j = 0; j < order.size(); ++j)
    probs.push_back(sigmoid(add(dot(out_w, get_row(x, static_cast<Index>(j))),
                                out_b)));
  return probs;
}

namespace {

// Ascending positions (in ordered space) of positive candidates.
std::vector<Index> gold_positions(const std::vector<std::size_t>& order,
                                  const std::set<std::size_t>& labels) {
  std::vector<Index> gold;
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    if (labels.count(order[pos])) gold.push_back(static_cast<Index>(pos));
  return gold;
}

}  // namespace

Prediction CarryoverModel::predict(const CarryoverInstance& instance,
                                   const OrderingPolicy& ordering) {
  Tape tape;
  Prediction pred;
  const std::vector<std::size_t> order =
      order_slots(instance.candidates, ordering);
  Encoded enc = encode_all(tape, instance);
  const std::size_t n = order.size();

  if (config_.decoder != DecoderKind::Pointer) {
    std::vector<Var> probs =
        slot_probs(tape, enc, order, DropoutMode::Eval, nullptr);
    pred.per_slot_prob.resize(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double p = probs[j].value().value();
      pred.per_slot_prob[order[j]] = p;
      if (p > config_.threshold) pred.selected.insert(order[j]);
    }
    return pred;
  }

  // Pointer: greedy argmax with emitted positions masked, stop at END.
  const Index p_dim = config_.pointer_hidden;
  LstmVars enc_w = bind_lstm(tape, ptr_enc_);
  LstmVars dec_w = bind_lstm(tape, ptr_dec_);

  std::vector<Var> ordered_slots;
  for (std::size_t j : order) ordered_slots.push_back(enc.slots[j]);
  std::vector<LstmState> enc_states =
      run_lstm(ordered_slots, lstm_zero_state(tape, p_dim), enc_w);

  std::vector<Var> memory;
  for (const LstmState& s : enc_states) memory.push_back(s.h);
  memory.push_back(tape.leaf(*end_sentinel_));
  Var enc_final =
      enc_states.empty() ? lstm_zero_state(tape, p_dim).h : enc_states.back().h;

  Var init_in = concat({enc_final, enc.context, enc.intent});
  LstmState state{
      tanh_op(add(matmul(tape.leaf(*ptr_init_w_), init_in),
                  tape.leaf(*ptr_init_b_))),
      tape.input(Tensor({p_dim}))};

  Var attn_wm = tape.leaf(*attn_wm_);
  Var attn_ws = tape.leaf(*attn_ws_);
  Var attn_v = tape.leaf(*attn_v_);
  std::vector<Var> keys;  // W_m m_j, computed once
  for (Var m : memory) keys.push_back(matmul(attn_wm, m));

  Tensor mask({static_cast<Index>(n) + 1});
  Var input = tape.leaf(*start_input_);
  for (std::size_t step = 0; step <= n; ++step) {
    state = lstm_cell_step(input, state, dec_w);
    Var query = matmul(attn_ws, state.h);
    std::vector<Var> scores;
    for (Var k : keys) scores.push_back(dot(attn_v, tanh_op(add(k, query))));
    Var masked = add(concat(scores), tape.input(mask));
    Index best = 0;
    masked.value().flat().maxCoeff(&best);
    if (best == static_cast<Index>(n)) {
      pred.decode_trace.push_back(-1);  // END
      break;
    }
    const std::size_t cand = order[static_cast<std::size_t>(best)];
    pred.selected.insert(cand);
    pred.decode_trace.push_back(static_cast<int>(cand));
    mask[best] = kMaskedScore;
    input = ordered_slots[static_cast<std::size_t>(best)];
  }
  return pred;
}

Var CarryoverModel::loss(Tape& tape, const CarryoverInstance& instance,
                         const OrderingPolicy& ordering, DropoutMode mode,
                         Rng* rng) {
  const std::vector<std::size_t> order =
      order_slots(instance.candidates, ordering);
  Encoded enc = encode_all(tape, instance);
  const std::size_t n = order.size();

  if (config_.decoder != DecoderKind::Pointer) {
    std::vector<Var> probs = slot_probs(tape, enc, order, mode, rng);
    Var total = tape.input(Tensor::scalar(0.0));
    for (std::size_t j = 0; j < n; ++j)
      total = add(total, binary_nll(probs[j], instance.labels.count(order[j]) > 0));
    return total;
  }

  // Pointer: teacher forcing over gold positives in ordered space, then END.
  const Index p_dim = config_.pointer_hidden;
  LstmVars enc_w = bind_lstm(tape, ptr_enc_);
  LstmVars dec_w = bind_lstm(tape, ptr_dec_);

  std::vector<Var> ordered_slots;
  for (std::size_t j : order)
    ordered_slots.push_back(dropout(enc.slots[j], config_.dropout, mode, rng));
  std::vector<LstmState> enc_states =
      run_lstm(ordered_slots, lstm_zero_state(tape, p_dim), enc_w);

  std::vector<Var> memory;
  for (const LstmState& s : enc_states) memory.push_back(s.h);
  memory.push_back(tape.leaf(*end_sentinel_));
  Var enc_final =
      enc_states.empty() ? lstm_zero_state(tape, p_dim).h : enc_states.back().h;

  Var init_in = dropout(concat({enc_final, enc.context, enc.intent}),
                        config_.dropout, mode, rng);
  LstmState state{
      tanh_op(add(matmul(tape.leaf(*ptr_init_w_), init_in),
                  tape.leaf(*ptr_init_b_))),
      tape.input(Tensor({p_dim}))};

  Var attn_wm = tape.leaf(*attn_wm_);
  Var attn_ws = tape.leaf(*attn_ws_);
  Var attn_v = tape.leaf(*attn_v_);
  std::vector<Var> keys;
  for (Var m : memory) keys.push_back(matmul(attn_wm, m));

  const std::vector<Index> gold = gold_positions(order, instance.labels);
  Tensor mask({static_cast<Index>(n) + 1});
  Var input = tape.leaf(*start_input_);
  Var total = tape.input(Tensor::scalar(0.0));
  for (std::size_t t = 0; t <= gold.size(); ++t) {
    state = lstm_cell_step(input, state, dec_w);
    Var query = matmul(attn_ws, state.h);
    std::vector<Var> scores;
    for (Var k : keys) scores.push_back(dot(attn_v, tanh_op(add(k, query))));
    Var masked = add(concat(scores), tape.input(mask));
    const Index target =
        t < gold.size() ? gold[t] : static_cast<Index>(n);  // END last
    total = add(total, cross_entropy_logits(masked, target));
    if (t < gold.size()) {
      mask[gold[t]] = kMaskedScore;
      input = ordered_slots[static_cast<std::size_t>(gold[t])];
    }
  }
  return total;
}

void CarryoverModel::zero_grads() {
  params_.zero_grads();
  embeddings_.params().zero_grads();
}

void CarryoverModel::apply_adam(double lr) {
  for (auto& p : params_.all()) adam_update(*p, lr);
  if (embeddings_.trainable())
    for (auto& p : embeddings_.params().all()) adam_update(*p, lr);
}

CarryoverModel::Snapshot CarryoverModel::snapshot() const {
  return Snapshot{params_.snapshot_values(),
                  embeddings_.params().snapshot_values()};
}

void CarryoverModel::restore(const Snapshot& s) {
  params_.restore_values(s.model_values);
  embeddings_.params().restore_values(s.embedding_values);
}

Var binary_nll(Var p, bool y) {
  if (y) return neg(log_op(clamp(p, kProbEps, 1.0 - kProbEps)));
  Var q = add_scalar(neg(p), 1.0);  // 1 - p
  return neg(log_op(clamp(q, kProbEps, 1.0 - kProbEps)));
}

const char* to_string(DecoderKind k) {
  switch (k) {
    case DecoderKind::Independent: return "independent";
    case DecoderKind::Pointer: return "pointer";
    case DecoderKind::Transformer: return "transformer";
  }
  return "?";
}

const char* to_string(OrderingMode m) {
  switch (m) {
    case OrderingMode::NoOrder: return "none";
    case OrderingMode::TurnOnlyOrder: return "turn";
    case OrderingMode::TemporalOrder: return "temporal";
  }
  return "?";
}

const char* to_string(ValueEncoding v) {
  return v == ValueEncoding::Ctx ? "ctx_lstm" : "ctx_avg";
}

}  // namespace carryover

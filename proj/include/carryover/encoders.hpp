#pragma once

#include <string>
#include <utility>
#include <vector>

#include "carryover/dialogue.hpp"
#include "carryover/embeddings.hpp"
#include "carryover/optim.hpp"
#include "carryover/tape.hpp"

namespace carryover {

// Reserved turn separators in the serialized dialogue stream; one per
// speaker so the BiLSTM can detect turn boundaries.
inline constexpr const char* kUserSeparator = "<user>";
inline constexpr const char* kAgentSeparator = "<agent>";

inline constexpr Index kDistanceDim = 4;

// ---- LSTM ----------------------------------------------------------------

/// Packed gate layout [i; f; g; o]. Forget-gate bias initialized to 1.
struct LstmParams {
  Parameter* w_x;  // [4H, D_in]
  Parameter* w_h;  // [4H, H]
  Parameter* b;    // [4H]
  Index input_dim;
  Index hidden;
};

LstmParams make_lstm(ParameterStore& store, const std::string& prefix,
                     Index input_dim, Index hidden, Rng& rng);

struct LstmVars {
  Var w_x, w_h, b;
  Index hidden;
};

LstmVars bind_lstm(Tape& tape, const LstmParams& p);

struct LstmState {
  Var h, c;
};

LstmState lstm_zero_state(Tape& tape, Index hidden);

/// One step: gates i,f,o = sigmoid, candidate g = tanh,
/// c = f*c_prev + i*g, h = o*tanh(c).
LstmState lstm_cell_step(Var x, const LstmState& prev, const LstmVars& w);

/// States for each input, left to right.
std::vector<LstmState> run_lstm(const std::vector<Var>& inputs,
                                LstmState init, const LstmVars& w);

struct BiLstmParams {
  LstmParams fwd, bwd;
};

BiLstmParams make_bilstm(ParameterStore& store, const std::string& prefix,
                         Index input_dim, Index hidden, Rng& rng);

// ---- dialogue encoding ---------------------------------------------------

struct DialogueEncoding {
  Var context;                              // [2H]: final fwd ; final bwd
  std::vector<std::vector<Var>> token_states;  // [2H] per token, per utterance
};

/// Serialize utterances oldest-to-newest with a speaker separator between
/// turns, run one BiLSTM, keep per-token states (separators excluded).
DialogueEncoding encode_dialogue(Tape& tape, EmbeddingTable& table,
                                 const Dialogue& dialogue,
                                 const BiLstmParams& weights);

// ---- slot encoding -------------------------------------------------------

/// Split a slot key into word tokens: underscore, hyphen, whitespace and
/// camelCase boundaries, lowercased.
std::vector<std::string> split_key(const std::string& key);

Var encode_slot_key(Tape& tape, EmbeddingTable& table, const std::string& key);

Var encode_slot_value_avg(Tape& tape, EmbeddingTable& table,
                          const Dialogue& dialogue, const Slot& slot);

Var encode_slot_value_ctx(const DialogueEncoding& encoding,
                          const Dialogue& dialogue, const Slot& slot);

/// Learned (d_max+1) x 4 distance table, clamped at d_max.
Var encode_distance(Tape& tape, Parameter& table, int d, bool trainable = true);

struct SlotEncoding {
  Var key, val, dist;
  Var full;  // [key ; val ; dist]
};

SlotEncoding assemble_slot_encoding(Var x_key, Var x_val, Var x_dist);

Var encode_intent(Tape& tape, EmbeddingTable& table, const Intent& intent);

}  // namespace carryover

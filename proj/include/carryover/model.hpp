#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carryover/decoders.hpp"
#include "carryover/embeddings.hpp"
#include "carryover/encoders.hpp"

namespace carryover {

struct ModelConfig {
  DecoderKind decoder = DecoderKind::Transformer;
  ValueEncoding value_encoding = ValueEncoding::Ctx;
  Index emb_dim = 16;       // word embedding width (paper scale: 300)
  Index lstm_hidden = 24;   // dialogue BiLSTM width per direction
  Index d_model = 32;       // transformer width / independent hidden
  Index heads = 4;          // paper scale: 80
  Index d_k = 8;            // paper scale: 64
  Index d_v = 8;
  Index layers = 1;
  Index ff_width = 0;       // 0 -> 4 * d_model
  Index pointer_hidden = 32;  // paper scale: 300
  double dropout = 0.3;
  double threshold = 0.5;
  int d_max = 6;

  Index value_dim() const {
    return value_encoding == ValueEncoding::Ctx ? 2 * lstm_hidden : emb_dim;
  }
  Index slot_dim() const { return emb_dim + value_dim() + kDistanceDim; }
  Index context_dim() const { return 2 * lstm_hidden; }
  Index cond_dim() const { return slot_dim() + context_dim() + emb_dim; }
  Index ff() const { return ff_width > 0 ? ff_width : 4 * d_model; }
};

/// One carryover model: encoders plus one of the three decoders.
class CarryoverModel {
 public:
  static CarryoverModel create(ModelConfig cfg, EmbeddingTable embeddings,
                               std::uint64_t seed);

  ModelConfig& config() { return config_; }
  const ModelConfig& config() const { return config_; }
  EmbeddingTable& embeddings() { return embeddings_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  Prediction predict(const CarryoverInstance& instance,
                     const OrderingPolicy& ordering);

  /// Training loss (teacher forcing for the pointer decoder).
  Var loss(Tape& tape, const CarryoverInstance& instance,
           const OrderingPolicy& ordering, DropoutMode mode, Rng* rng);

  void zero_grads();
  void apply_adam(double lr);

  struct Snapshot {
    std::vector<Tensor> model_values;
    std::vector<Tensor> embedding_values;
  };
  Snapshot snapshot() const;
  void restore(const Snapshot& s);

 private:
  CarryoverModel(ModelConfig cfg, EmbeddingTable embeddings)
      : config_(cfg), embeddings_(std::move(embeddings)) {}

  struct Encoded {
    std::vector<Var> slots;  // per candidate, original index order
    Var context;
    Var intent;
  };
  Encoded encode_all(Tape& tape, const CarryoverInstance& instance);

  std::vector<Var> slot_probs(Tape& tape, const Encoded& enc,
                              const std::vector<std::size_t>& order,
                              DropoutMode mode, Rng* rng);

  ModelConfig config_;
  EmbeddingTable embeddings_;
  ParameterStore params_;

  Parameter* distance_table_ = nullptr;
  BiLstmParams dialogue_bilstm_{};

  // independent decoder
  Parameter* mlp_w1_ = nullptr;
  Parameter* mlp_b1_ = nullptr;
  Parameter* mlp_w2_ = nullptr;  // [d_model]
  Parameter* mlp_b2_ = nullptr;  // scalar

  // pointer decoder
  LstmParams ptr_enc_{};
  LstmParams ptr_dec_{};
  Parameter* ptr_init_w_ = nullptr;  // [P, P + ctx + emb]
  Parameter* ptr_init_b_ = nullptr;
  Parameter* attn_wm_ = nullptr;  // [P, P]
  Parameter* attn_ws_ = nullptr;  // [P, P]
  Parameter* attn_v_ = nullptr;   // [P]
  Parameter* end_sentinel_ = nullptr;  // [P]
  Parameter* start_input_ = nullptr;   // [slot_dim]

  // transformer decoder
  Parameter* proj_w_ = nullptr;  // [cond_dim, d_model]
  Parameter* proj_b_ = nullptr;
  struct TransformerLayer {
    Parameter *wq, *wk, *wv, *wo;
    Parameter *ln1_g, *ln1_b;
    Parameter *ff_w1, *ff_b1, *ff_w2, *ff_b2;
    Parameter *ln2_g, *ln2_b;
  };
  std::vector<TransformerLayer> layers_;
  Parameter* out_w_ = nullptr;  // [d_model]
  Parameter* out_b_ = nullptr;  // scalar
};

/// -[y log p + (1-y) log(1-p)] with p clamped to [1e-12, 1-1e-12].
Var binary_nll(Var p, bool y);

const char* to_string(DecoderKind k);
const char* to_string(OrderingMode m);
const char* to_string(ValueEncoding v);

}  // namespace carryover

#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "carryover/dialogue.hpp"
#include "carryover/optim.hpp"
#include "carryover/tape.hpp"

namespace carryover {

enum class DecoderKind { Independent, Pointer, Transformer };
enum class ValueEncoding { Avg, Ctx };
enum class OrderingMode { NoOrder, TurnOnlyOrder, TemporalOrder };

struct OrderingPolicy {
  OrderingMode mode = OrderingMode::TemporalOrder;
  std::uint64_t seed = 0;
};

struct Prediction {
  std::set<std::size_t> selected;
  std::vector<double> per_slot_prob;  // probability decoders only
  std::vector<int> decode_trace;      // pointer only; END recorded as -1
};

/// Permutation of candidate indices under the given policy.
///   NoOrder       seeded uniform shuffle
///   TurnOnlyOrder distance descending, seeded shuffle within a distance
///   TemporalOrder distance descending, then span_left ascending
/// The shuffles mix the policy seed with a hash of the candidate list, so
/// the result is deterministic per candidate set but varies across sets.
std::vector<std::size_t> order_slots(const std::vector<CandidateSlot>& candidates,
                                     const OrderingPolicy& policy);

/// One multi-head self-attention block without positional encoding.
/// X is [N, D_model]; wq/wk/wv pack all heads column-wise.
Var multihead_self_attention(Var x, Var wq, Var wk, Var wv, Var wo,
                             Index heads, Index d_k, Index d_v);

}  // namespace carryover

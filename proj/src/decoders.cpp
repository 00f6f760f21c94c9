#include "carryover/decoders.hpp"

#include <algorithm>
#include <cmath>

#include "carryover/errors.hpp"
#include "carryover/rng.hpp"

namespace carryover {

namespace {

std::uint64_t hash_candidates(const std::vector<CandidateSlot>& cs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (const CandidateSlot& c : cs) {
    for (char ch : c.mapped_key) mix(static_cast<std::uint64_t>(ch));
    mix(static_cast<std::uint64_t>(c.source.distance) + 0x9e37);
    mix(static_cast<std::uint64_t>(c.source.span_left));
    mix(static_cast<std::uint64_t>(c.source.span_right));
  }
  return h;
}

}  // namespace

std::vector<std::size_t> order_slots(
    const std::vector<CandidateSlot>& candidates,
    const OrderingPolicy& policy) {
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto by_distance_desc = [&](std::size_t a, std::size_t b) {
    return candidates[a].source.distance > candidates[b].source.distance;
  };

  switch (policy.mode) {
    case OrderingMode::NoOrder: {
      Rng rng(policy.seed ^ hash_candidates(candidates));
      rng.shuffle(order);
      break;
    }
    case OrderingMode::TurnOnlyOrder: {
      std::stable_sort(order.begin(), order.end(), by_distance_desc);
      Rng rng(policy.seed ^ hash_candidates(candidates));
      std::size_t start = 0;
      while (start < order.size()) {
        std::size_t end = start;
        while (end < order.size() &&
               candidates[order[end]].source.distance ==
                   candidates[order[start]].source.distance)
          ++end;
        std::vector<std::size_t> group(order.begin() + start,
                                       order.begin() + end);
        rng.shuffle(group);
        std::copy(group.begin(), group.end(), order.begin() + start);
        start = end;
      }
      break;
    }
    case OrderingMode::TemporalOrder: {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         const Slot& sa = candidates[a].source;
                         const Slot& sb = candidates[b].source;
                         if (sa.distance != sb.distance)
                           return sa.distance > sb.distance;
                         return sa.span_left < sb.span_left;
                       });
      break;
    }
  }
  return order;
}

Var multihead_self_attention(Var x, Var wq, Var wk, Var wv, Var wo,
                             Index heads, Index d_k, Index d_v) {
  if (x.value().rank() != 2) throw ShapeMismatch("attention input rank 2");
  if (wq.value().cols() != heads * d_k || wk.value().cols() != heads * d_k ||
      wv.value().cols() != heads * d_v)
    throw ShapeMismatch("attention projection widths");

  Var q = matmul(x, wq);  // [N, Z*d_k]
  Var k = matmul(x, wk);
  Var v = matmul(x, wv);  // [N, Z*d_v]

  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(d_k));
  std::vector<Var> head_outputs;
  head_outputs.reserve(static_cast<std::size_t>(heads));
  for (Index h = 0; h < heads; ++h) {
    Var qh = slice_cols(q, h * d_k, d_k);
    Var kh = slice_cols(k, h * d_k, d_k);
    Var vh = slice_cols(v, h * d_v, d_v);
    Var scores = scale(matmul(qh, transpose(kh)), inv_sqrt_dk);
    Var weights = softmax(scores);
    head_outputs.push_back(matmul(weights, vh));
  }
  return matmul(concat_cols(head_outputs), wo);
}

}  // namespace carryover

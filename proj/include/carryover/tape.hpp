#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "carryover/rng.hpp"
#include "carryover/tensor.hpp"

namespace carryover {

struct Parameter;
class Tape;

/// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Tensor& grad() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Recorded computation graph for reverse-mode differentiation.
///
/// Nodes are appended in forward (topological) order; backward() runs one
/// reverse sweep, accumulating gradients additively across fan-out. A tape
/// is single-use: after backward() it is finalized and rejects further work.
class Tape {
 public:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    std::function<void(Tape&)> backward;
  };

  Var input(Tensor v, bool requires_grad = false);
  /// Leaf bound to a Parameter; backward() adds into the parameter gradient.
  Var leaf(Parameter& p);

  void backward(Var loss);

  bool finalized() const { return finalized_; }
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  Var emit(Tensor value, bool requires_grad,
           std::function<void(Tape&)> backward);

 private:
  void check_open() const;

  std::deque<Node> nodes_;
  bool finalized_ = false;
};

inline const Tensor& Var::value() const { return tape_->node(id_).value; }
inline const Tensor& Var::grad() const { return tape_->node(id_).grad; }

// ---- recorded operations -------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var neg(Var a);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
Var add_scalar(Var a, double s);

/// Matrix [m,n] plus bias [n] broadcast over rows.
Var add_rowwise(Var x, Var bias);

Var matmul(Var a, Var b);  // [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]
Var transpose(Var a);
Var dot(Var a, Var b);  // rank-1 . rank-1 -> scalar

enum class ElemOp { Sigmoid, Tanh, Relu, Exp, Log };
Var sigmoid(Var x);
Var tanh_op(Var x);
Var relu(Var x);
Var exp_op(Var x);
Var log_op(Var x);
Var elementwise(ElemOp op, Var x);

/// Pass-through inside (lo, hi); zero gradient where the value is clamped.
Var clamp(Var x, double lo, double hi);

/// Softmax over the last axis (rank 1 or 2), max-subtracted.
Var softmax(Var x);

Var sum(Var x);  // all entries -> scalar

Var concat(const std::vector<Var>& xs);     // rank-1 pieces
Var slice(Var x, Index start, Index len);   // rank-1
Var stack_rows(const std::vector<Var>& xs); // rank-1 pieces -> rank-2
Var get_row(Var x, Index i);
Var slice_cols(Var x, Index start, Index len);
Var concat_cols(const std::vector<Var>& xs);

/// Per-row standardization followed by gain/bias, epsilon 1e-5.
Var layer_norm(Var x, Var gain, Var bias);

enum class DropoutMode { Train, Eval };
/// Inverted dropout: kept entries scaled by 1/(1-rate). Eval is identity.
Var dropout(Var x, double rate, DropoutMode mode, Rng* rng);

/// -log softmax(scores)[target], fused for stability.
Var cross_entropy_logits(Var scores, Index target);

}  // namespace carryover

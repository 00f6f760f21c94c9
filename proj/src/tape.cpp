#include "carryover/tape.hpp"

#include <cmath>
#include <utility>

#include "carryover/errors.hpp"
#include "carryover/optim.hpp"

namespace carryover {

namespace {

bool any_grad(std::initializer_list<Var> vs) {
  for (Var v : vs) {
    if (v.tape()->node(v.id()).requires_grad) return true;
  }
  return false;
}

void same_tape(std::initializer_list<Var> vs) {
  Tape* t = nullptr;
  for (Var v : vs) {
    if (!v.valid()) throw Error("invalid Var");
    if (t == nullptr) t = v.tape();
    if (v.tape() != t) throw Error("Vars from different tapes");
  }
}

Eigen::Map<RowMatrixXd> as_matrix(Tensor& t, Index rows, Index cols) {
  return Eigen::Map<RowMatrixXd>(t.flat().data(), rows, cols);
}

Eigen::Map<const RowMatrixXd> as_matrix(const Tensor& t, Index rows,
                                        Index cols) {
  return Eigen::Map<const RowMatrixXd>(t.flat().data(), rows, cols);
}

// Rows/cols of a rank-1 or rank-2 tensor viewed as a matrix (vector = column).
std::pair<Index, Index> mat_dims(const Tensor& t) {
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  if (t.rank() == 1) return {t.dim(0), 1};
  throw ShapeMismatch("expected rank 1 or 2");
}

void accumulate(Tape& tape, int id, const Eigen::VectorXd& g) {
  Tape::Node& n = tape.node(id);
  if (n.requires_grad) n.grad.flat() += g;
}

}  // namespace

void Tape::check_open() const {
  if (finalized_) throw TapeFinalized("tape already ran backward");
}

Var Tape::emit(Tensor value, bool requires_grad,
               std::function<void(Tape&)> backward) {
  check_open();
  Node n;
  n.value = std::move(value);
  n.grad = n.value.zeros_like();
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::input(Tensor v, bool requires_grad) {
  return emit(std::move(v), requires_grad, nullptr);
}

Var Tape::leaf(Parameter& p) {
  Var v = emit(p.value, true, nullptr);
  nodes_.back().param = &p;
  return v;
}

void Tape::backward(Var loss) {
  check_open();
  if (loss.tape() != this) throw Error("loss from another tape");
  Node& l = node(loss.id());
  if (!l.value.is_scalar()) throw NonScalarLoss();
  finalized_ = true;
  l.grad.flat()[0] = 1.0;
  for (int i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward) n.backward(*this);
  }
  for (Node& n : nodes_) {
    if (n.param != nullptr) n.param->grad.flat() += n.grad.flat();
  }
}

// ---- arithmetic ----------------------------------------------------------

namespace {

// Emit a node and rebind its backward closure to the assigned node id.
Var emit_op(Tape& t, Tensor out, bool rg,
            std::function<void(Tape&, int)> backward) {
  if (!rg) return t.emit(std::move(out), false, nullptr);
  Var v = t.emit(std::move(out), true, nullptr);
  int oi = v.id();
  t.node(oi).backward = [oi, backward](Tape& tp) { backward(tp, oi); };
  return v;
}

}  // namespace

Var add(Var a, Var b) {
  same_tape({a, b});
  require_same_shape(a.value(), b.value());
  Tensor out = a.value();
  out.flat() += b.value().flat();
  int ai = a.id(), bi = b.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a, b}),
                 [ai, bi](Tape& tp, int oi) {
                   const auto& g = tp.node(oi).grad.flat();
                   accumulate(tp, ai, g);
                   accumulate(tp, bi, g);
                 });
}

Var sub(Var a, Var b) {
  same_tape({a, b});
  require_same_shape(a.value(), b.value());
  Tensor out = a.value();
  out.flat() -= b.value().flat();
  int ai = a.id(), bi = b.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a, b}),
                 [ai, bi](Tape& tp, int oi) {
                   const auto& g = tp.node(oi).grad.flat();
                   accumulate(tp, ai, g);
                   accumulate(tp, bi, -g);
                 });
}

Var neg(Var a) {
  Tensor out = a.value();
  out.flat() = -out.flat();
  int ai = a.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a}),
                 [ai](Tape& tp, int oi) {
                   accumulate(tp, ai, -tp.node(oi).grad.flat());
                 });
}

Var mul(Var a, Var b) {
  same_tape({a, b});
  require_same_shape(a.value(), b.value());
  Tensor out = a.value();
  out.flat() = out.flat().cwiseProduct(b.value().flat());
  int ai = a.id(), bi = b.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a, b}),
                 [ai, bi](Tape& tp, int oi) {
                   const auto& g = tp.node(oi).grad.flat();
                   accumulate(tp, ai, g.cwiseProduct(tp.node(bi).value.flat()));
                   accumulate(tp, bi, g.cwiseProduct(tp.node(ai).value.flat()));
                 });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  out.flat() *= s;
  int ai = a.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a}),
                 [ai, s](Tape& tp, int oi) {
                   accumulate(tp, ai, s * tp.node(oi).grad.flat());
                 });
}

Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  out.flat().array() += s;
  int ai = a.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a}),
                 [ai](Tape& tp, int oi) {
                   accumulate(tp, ai, tp.node(oi).grad.flat());
                 });
}

Var add_rowwise(Var x, Var bias) {
  same_tape({x, bias});
  if (x.value().rank() != 2 || bias.value().rank() != 1 ||
      bias.value().dim(0) != x.value().cols())
    throw ShapeMismatch("add_rowwise: bias must match column count");
  const Index m = x.value().rows(), n = x.value().cols();
  Tensor out = x.value();
  out.mat().rowwise() += bias.value().flat().transpose();
  int xi = x.id(), bi = bias.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x, bias}),
                 [xi, bi, m, n](Tape& tp, int oi) {
                   auto g = as_matrix(tp.node(oi).grad, m, n);
                   if (tp.node(xi).requires_grad)
                     as_matrix(tp.node(xi).grad, m, n) += g;
                   accumulate(tp, bi, g.colwise().sum().transpose());
                 });
}

// ---- linear algebra ------------------------------------------------------

Var matmul(Var a, Var b) {
  same_tape({a, b});
  if (a.value().rank() != 2) throw ShapeMismatch("matmul: lhs must be rank 2");
  auto [bk, bn] = mat_dims(b.value());
  const Index m = a.value().rows(), k = a.value().cols();
  if (k != bk) throw ShapeMismatch("matmul: inner dimensions differ");
  Tensor out = b.value().rank() == 2 ? Tensor({m, bn}) : Tensor({m});
  as_matrix(out, m, bn) =
      a.value().mat() * as_matrix(b.value(), bk, bn);
  int ai = a.id(), bi = b.id();
  return emit_op(
      *a.tape(), std::move(out), any_grad({a, b}),
      [ai, bi, m, k, bn](Tape& tp, int oi) {
        auto g = as_matrix(tp.node(oi).grad, m, bn);
        auto av = as_matrix(tp.node(ai).value, m, k);
        auto bv = as_matrix(tp.node(bi).value, k, bn);
        if (tp.node(ai).requires_grad)
          as_matrix(tp.node(ai).grad, m, k) += g * bv.transpose();
        if (tp.node(bi).requires_grad)
          as_matrix(tp.node(bi).grad, k, bn) += av.transpose() * g;
      });
}

Var transpose(Var a) {
  if (a.value().rank() != 2) throw ShapeMismatch("transpose: rank 2 required");
  const Index m = a.value().rows(), n = a.value().cols();
  Tensor out({n, m});
  out.mat() = a.value().mat().transpose();
  int ai = a.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a}),
                 [ai, m, n](Tape& tp, int oi) {
                   if (tp.node(ai).requires_grad)
                     as_matrix(tp.node(ai).grad, m, n) +=
                         as_matrix(tp.node(oi).grad, n, m).transpose();
                 });
}

Var dot(Var a, Var b) {
  same_tape({a, b});
  if (a.value().rank() != 1 || b.value().rank() != 1)
    throw ShapeMismatch("dot: rank 1 required");
  require_same_shape(a.value(), b.value());
  Tensor out = Tensor::scalar(a.value().flat().dot(b.value().flat()));
  int ai = a.id(), bi = b.id();
  return emit_op(*a.tape(), std::move(out), any_grad({a, b}),
                 [ai, bi](Tape& tp, int oi) {
                   const double g = tp.node(oi).grad.flat()[0];
                   accumulate(tp, ai, g * tp.node(bi).value.flat());
                   accumulate(tp, bi, g * tp.node(ai).value.flat());
                 });
}

// ---- elementwise nonlinearities ------------------------------------------

Var sigmoid(Var x) {
  Tensor out = x.value();
  out.flat() = (1.0 + (-out.flat().array()).exp()).inverse().matrix();
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi](Tape& tp, int oi) {
                   const auto s = tp.node(oi).value.flat().array();
                   accumulate(tp, xi,
                              (tp.node(oi).grad.flat().array() * s * (1.0 - s))
                                  .matrix());
                 });
}

Var tanh_op(Var x) {
  Tensor out = x.value();
  out.flat() = out.flat().array().tanh().matrix();
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi](Tape& tp, int oi) {
                   const auto t = tp.node(oi).value.flat().array();
                   accumulate(tp, xi,
                              (tp.node(oi).grad.flat().array() * (1.0 - t * t))
                                  .matrix());
                 });
}

Var relu(Var x) {
  Tensor out = x.value();
  out.flat() = out.flat().cwiseMax(0.0);
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi](Tape& tp, int oi) {
                   const auto mask =
                       (tp.node(xi).value.flat().array() > 0.0).cast<double>();
                   accumulate(tp, xi,
                              (tp.node(oi).grad.flat().array() * mask).matrix());
                 });
}

Var exp_op(Var x) {
  Tensor out = x.value();
  out.flat() = out.flat().array().exp().matrix();
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi](Tape& tp, int oi) {
                   accumulate(tp, xi,
                              tp.node(oi).grad.flat().cwiseProduct(
                                  tp.node(oi).value.flat()));
                 });
}

Var log_op(Var x) {
  if ((x.value().flat().array() <= 0.0).any())
    throw DomainError("log of non-positive entry");
  Tensor out = x.value();
  out.flat() = out.flat().array().log().matrix();
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi](Tape& tp, int oi) {
                   accumulate(tp, xi,
                              tp.node(oi).grad.flat().cwiseQuotient(
                                  tp.node(xi).value.flat()));
                 });
}

Var elementwise(ElemOp op, Var x) {
  switch (op) {
    case ElemOp::Sigmoid: return sigmoid(x);
    case ElemOp::Tanh: return tanh_op(x);
    case ElemOp::Relu: return relu(x);
    case ElemOp::Exp: return exp_op(x);
    case ElemOp::Log: return log_op(x);
  }
  throw Error("unreachable");
}

Var clamp(Var x, double lo, double hi) {
  Tensor out = x.value();
  out.flat() = out.flat().cwiseMax(lo).cwiseMin(hi);
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi, lo, hi](Tape& tp, int oi) {
                   const auto xv = tp.node(xi).value.flat().array();
                   const auto mask =
                       ((xv > lo) && (xv < hi)).cast<double>();
                   accumulate(tp, xi,
                              (tp.node(oi).grad.flat().array() * mask).matrix());
                 });
}

// ---- reductions & softmax ------------------------------------------------

Var softmax(Var x) {
  auto [rows, cols] = x.value().rank() == 2
                          ? std::pair<Index, Index>{x.value().rows(),
                                                    x.value().cols()}
                          : std::pair<Index, Index>{1, x.value().dim(0)};
  Tensor out = x.value();
  auto m = as_matrix(out, rows, cols);
  for (Index r = 0; r < rows; ++r) {
    auto row = m.row(r).array();
    row -= row.maxCoeff();
    row = row.exp();
    row /= row.sum();
  }
  int xi = x.id();
  return emit_op(
      *x.tape(), std::move(out), any_grad({x}),
      [xi, rows, cols](Tape& tp, int oi) {
        if (!tp.node(xi).requires_grad) return;
        auto y = as_matrix(tp.node(oi).value, rows, cols);
        auto g = as_matrix(tp.node(oi).grad, rows, cols);
        auto dx = as_matrix(tp.node(xi).grad, rows, cols);
        for (Index r = 0; r < rows; ++r) {
          const double s = g.row(r).dot(y.row(r));
          dx.row(r).array() +=
              y.row(r).array() * (g.row(r).array() - s);
        }
      });
}

Var sum(Var x) {
  Tensor out = Tensor::scalar(x.value().flat().sum());
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi](Tape& tp, int oi) {
                   const double g = tp.node(oi).grad.flat()[0];
                   if (tp.node(xi).requires_grad)
                     tp.node(xi).grad.flat().array() += g;
                 });
}

// ---- shape manipulation --------------------------------------------------

Var concat(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeMismatch("concat of empty list");
  same_tape({xs.front()});
  Index total = 0;
  bool rg = false;
  std::vector<int> ids;
  std::vector<Index> lens;
  for (Var v : xs) {
    if (v.tape() != xs.front().tape()) throw Error("Vars from different tapes");
    if (v.value().rank() > 1)
      throw ShapeMismatch("concat: rank 0 or 1 required");
    total += v.value().size();  // scalars contribute one entry
    rg = rg || v.tape()->node(v.id()).requires_grad;
    ids.push_back(v.id());
    lens.push_back(v.value().size());
  }
  Tensor out({total});
  Index off = 0;
  for (Var v : xs) {
    out.flat().segment(off, v.value().size()) = v.value().flat();
    off += v.value().size();
  }
  return emit_op(*xs.front().tape(), std::move(out), rg,
                 [ids, lens](Tape& tp, int oi) {
                   Index off = 0;
                   for (std::size_t i = 0; i < ids.size(); ++i) {
                     accumulate(tp, ids[i],
                                tp.node(oi).grad.flat().segment(off, lens[i]));
                     off += lens[i];
                   }
                 });
}

Var slice(Var x, Index start, Index len) {
  if (x.value().rank() != 1) throw ShapeMismatch("slice: rank 1 required");
  if (start < 0 || len <= 0 || start + len > x.value().dim(0))
    throw ShapeMismatch("slice out of range");
  Tensor out({len});
  out.flat() = x.value().flat().segment(start, len);
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi, start, len](Tape& tp, int oi) {
                   if (tp.node(xi).requires_grad)
                     tp.node(xi).grad.flat().segment(start, len) +=
                         tp.node(oi).grad.flat();
                 });
}

Var stack_rows(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeMismatch("stack_rows of empty list");
  const Index n = xs.front().value().dim(0);
  bool rg = false;
  std::vector<int> ids;
  for (Var v : xs) {
    if (v.tape() != xs.front().tape()) throw Error("Vars from different tapes");
    if (v.value().rank() != 1 || v.value().dim(0) != n)
      throw ShapeMismatch("stack_rows: ragged rows");
    rg = rg || v.tape()->node(v.id()).requires_grad;
    ids.push_back(v.id());
  }
  const Index m = static_cast<Index>(xs.size());
  Tensor out({m, n});
  for (Index r = 0; r < m; ++r)
    out.mat().row(r) = xs[static_cast<std::size_t>(r)].value().flat();
  return emit_op(*xs.front().tape(), std::move(out), rg,
                 [ids, m, n](Tape& tp, int oi) {
                   auto g = as_matrix(tp.node(oi).grad, m, n);
                   for (Index r = 0; r < m; ++r)
                     accumulate(tp, ids[static_cast<std::size_t>(r)],
                                g.row(r).transpose());
                 });
}

Var get_row(Var x, Index i) {
  if (x.value().rank() != 2) throw ShapeMismatch("get_row: rank 2 required");
  if (i < 0 || i >= x.value().rows()) throw ShapeMismatch("row out of range");
  const Index n = x.value().cols();
  Tensor out({n});
  out.flat() = x.value().mat().row(i).transpose();
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi, i, n](Tape& tp, int oi) {
                   if (tp.node(xi).requires_grad)
                     as_matrix(tp.node(xi).grad, tp.node(xi).value.rows(), n)
                         .row(i) += tp.node(oi).grad.flat().transpose();
                 });
}

Var slice_cols(Var x, Index start, Index len) {
  if (x.value().rank() != 2) throw ShapeMismatch("slice_cols: rank 2 required");
  const Index m = x.value().rows(), n = x.value().cols();
  if (start < 0 || len <= 0 || start + len > n)
    throw ShapeMismatch("slice_cols out of range");
  Tensor out({m, len});
  out.mat() = x.value().mat().middleCols(start, len);
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi, start, len, m, n](Tape& tp, int oi) {
                   if (tp.node(xi).requires_grad)
                     as_matrix(tp.node(xi).grad, m, n).middleCols(start, len) +=
                         as_matrix(tp.node(oi).grad, m, len);
                 });
}

Var concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeMismatch("concat_cols of empty list");
  const Index m = xs.front().value().rows();
  Index total = 0;
  bool rg = false;
  std::vector<int> ids;
  std::vector<Index> widths;
  for (Var v : xs) {
    if (v.tape() != xs.front().tape()) throw Error("Vars from different tapes");
    if (v.value().rank() != 2 || v.value().rows() != m)
      throw ShapeMismatch("concat_cols: row counts differ");
    total += v.value().cols();
    rg = rg || v.tape()->node(v.id()).requires_grad;
    ids.push_back(v.id());
    widths.push_back(v.value().cols());
  }
  Tensor out({m, total});
  Index off = 0;
  for (Var v : xs) {
    out.mat().middleCols(off, v.value().cols()) = v.value().mat();
    off += v.value().cols();
  }
  return emit_op(*xs.front().tape(), std::move(out), rg,
                 [ids, widths, m, total](Tape& tp, int oi) {
                   auto g = as_matrix(tp.node(oi).grad, m, total);
                   Index off = 0;
                   for (std::size_t i = 0; i < ids.size(); ++i) {
                     if (tp.node(ids[i]).requires_grad)
                       as_matrix(tp.node(ids[i]).grad, m, widths[i]) +=
                           g.middleCols(off, widths[i]);
                     off += widths[i];
                   }
                 });
}

// ---- layer norm ----------------------------------------------------------

Var layer_norm(Var x, Var gain, Var bias) {
  same_tape({x, gain, bias});
  constexpr double kEps = 1e-5;
  auto [rows, cols] = x.value().rank() == 2
                          ? std::pair<Index, Index>{x.value().rows(),
                                                    x.value().cols()}
                          : std::pair<Index, Index>{1, x.value().dim(0)};
  if (gain.value().rank() != 1 || gain.value().dim(0) != cols ||
      bias.value().rank() != 1 || bias.value().dim(0) != cols)
    throw ShapeMismatch("layer_norm: gain/bias must match last dim");

  Tensor xhat_t = x.value().zeros_like();
  Eigen::VectorXd inv_std(rows);
  auto xm = as_matrix(x.value(), rows, cols);
  auto xh = as_matrix(xhat_t, rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const double mu = xm.row(r).mean();
    const double var = (xm.row(r).array() - mu).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + kEps);
    xh.row(r) = (xm.row(r).array() - mu) * inv_std[r];
  }
  Tensor out = x.value().zeros_like();
  auto om = as_matrix(out, rows, cols);
  for (Index r = 0; r < rows; ++r)
    om.row(r) = xh.row(r).cwiseProduct(gain.value().flat().transpose()) +
                bias.value().flat().transpose();

  int xi = x.id(), gi = gain.id(), bi = bias.id();
  return emit_op(
      *x.tape(), std::move(out), any_grad({x, gain, bias}),
      [xi, gi, bi, rows, cols, xhat_t, inv_std](Tape& tp, int oi) {
        auto g = as_matrix(tp.node(oi).grad, rows, cols);
        auto xh = as_matrix(xhat_t, rows, cols);
        const auto gainv = tp.node(gi).value.flat().transpose();
        for (Index r = 0; r < rows; ++r) {
          if (tp.node(xi).requires_grad) {
            Eigen::RowVectorXd dxhat = g.row(r).cwiseProduct(gainv);
            const double mean_dxhat = dxhat.mean();
            const double mean_dxhat_xh =
                dxhat.cwiseProduct(xh.row(r)).mean();
            as_matrix(tp.node(xi).grad, rows, cols).row(r) +=
                inv_std[r] * (dxhat.array() - mean_dxhat -
                              xh.row(r).array() * mean_dxhat_xh)
                                 .matrix();
          }
          accumulate(tp, gi, g.row(r).cwiseProduct(xh.row(r)).transpose());
          accumulate(tp, bi, g.row(r).transpose());
        }
      });
}

// ---- dropout -------------------------------------------------------------

Var dropout(Var x, double rate, DropoutMode mode, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) throw InvalidRate("dropout rate not in [0,1)");
  if (mode == DropoutMode::Eval || rate == 0.0) {
    // Bit-exact identity in eval mode.
    Tensor out = x.value();
    int xi = x.id();
    return emit_op(*x.tape(), std::move(out), any_grad({x}),
                   [xi](Tape& tp, int oi) {
                     accumulate(tp, xi, tp.node(oi).grad.flat());
                   });
  }
  if (rng == nullptr) throw Error("dropout in Train mode needs an rng");
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask = x.value().zeros_like();
  for (Index i = 0; i < mask.size(); ++i)
    mask[i] = rng->bernoulli(rate) ? 0.0 : keep_scale;
  Tensor out = x.value();
  out.flat() = out.flat().cwiseProduct(mask.flat());
  int xi = x.id();
  return emit_op(*x.tape(), std::move(out), any_grad({x}),
                 [xi, mask](Tape& tp, int oi) {
                   accumulate(tp, xi,
                              tp.node(oi).grad.flat().cwiseProduct(mask.flat()));
                 });
}

// ---- losses --------------------------------------------------------------

Var cross_entropy_logits(Var scores, Index target) {
  if (scores.value().rank() != 1)
    throw ShapeMismatch("cross_entropy_logits: rank 1 required");
  const Index n = scores.value().dim(0);
  if (target < 0 || target >= n)
    throw ShapeMismatch("cross_entropy_logits: target out of range");
  const auto s = scores.value().flat().array();
  const double m = s.maxCoeff();
  const double lse = m + std::log((s - m).exp().sum());
  Tensor out = Tensor::scalar(lse - s[target]);
  int xi = scores.id();
  return emit_op(*scores.tape(), std::move(out), any_grad({scores}),
                 [xi, target, n](Tape& tp, int oi) {
                   if (!tp.node(xi).requires_grad) return;
                   const double g = tp.node(oi).grad.flat()[0];
                   const auto s = tp.node(xi).value.flat().array();
                   const double m = s.maxCoeff();
                   Eigen::ArrayXd p = (s - m).exp();
                   p /= p.sum();
                   p[target] -= 1.0;
                   tp.node(xi).grad.flat() += (g * p).matrix();
                 });
}

}  // namespace carryover

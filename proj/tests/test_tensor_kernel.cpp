#include <cmath>

#include "carryover/errors.hpp"
#include "carryover/gradcheck.hpp"
#include "carryover/optim.hpp"
#include "carryover/tape.hpp"
#include "carryover/tensor.hpp"
#include "doctest.h"

using namespace carryover;

namespace {

Tensor random_tensor(std::vector<Index> shape, Rng& rng, double lo = -2.0,
                     double hi = 2.0) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("matmul values") {
  Tape tape;
  Tensor id2 = Tensor::from_matrix((RowMatrixXd(2, 2) << 1, 0, 0, 1).finished());
  Tensor b = Tensor::from_matrix((RowMatrixXd(2, 2) << 5, 6, 7, 8).finished());
  Var r = matmul(tape.input(id2), tape.input(b));
  CHECK(r.value().mat() == b.mat());

  Tensor a = Tensor::from_matrix((RowMatrixXd(2, 2) << 1, 2, 3, 4).finished());
  Var r2 = matmul(tape.input(a), tape.input(b));
  // hand arithmetic oracle
  CHECK(r2.value().at(0, 0) == doctest::Approx(19));
  CHECK(r2.value().at(0, 1) == doctest::Approx(22));
  CHECK(r2.value().at(1, 0) == doctest::Approx(43));
  CHECK(r2.value().at(1, 1) == doctest::Approx(50));

  Tensor bad({2, 3});
  CHECK_THROWS_AS(matmul(tape.input(bad), tape.input(bad)), ShapeMismatch);
}

TEST_CASE("elementwise values") {
  Tape tape;
  Var x = tape.input(Tensor::vector({0.0, 2.0}));
  Var s = elementwise(ElemOp::Sigmoid, x);
  CHECK(s.value()[0] == doctest::Approx(0.5));
  CHECK(s.value()[1] == doctest::Approx(0.8807970779778823).epsilon(1e-12));
  CHECK(elementwise(ElemOp::Tanh, x).value()[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(elementwise(ElemOp::Log, tape.input(Tensor::vector({0.0}))),
                  DomainError);
}

TEST_CASE("softmax values and row-sum invariant") {
  Tape tape;
  Var a = softmax(tape.input(Tensor::vector({0.0, 0.0})));
  CHECK(a.value()[0] == doctest::Approx(0.5));
  Var b = softmax(tape.input(Tensor::vector({1.0, 1.0, 1.0})));
  CHECK(b.value()[1] == doctest::Approx(1.0 / 3.0));
  Var c = softmax(tape.input(Tensor::vector({1.0, 2.0})));
  CHECK(c.value()[0] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
  CHECK(c.value()[1] == doctest::Approx(0.7310585786300049).epsilon(1e-12));

  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    Tensor x = random_tensor({3, 5}, rng, -10.0, 10.0);
    Var y = softmax(tape.input(x));
    for (Index r = 0; r < 3; ++r) {
      double s = y.value().mat().row(r).sum();
      CHECK(std::abs(s - 1.0) < 1e-12);
      for (Index j = 0; j < 5; ++j) {
        CHECK(y.value().at(r, j) > 0.0);
        CHECK(y.value().at(r, j) <= 1.0);
      }
    }
  }
}

TEST_CASE("layer_norm values") {
  Tape tape;
  Var gain = tape.input(Tensor::vector({1.0, 1.0, 1.0}));
  Var bias = tape.input(Tensor::vector({0.0, 0.0, 0.0}));
  Var y = layer_norm(tape.input(Tensor::vector({1.0, 1.0, 1.0})), gain, bias);
  for (Index i = 0; i < 3; ++i) CHECK(y.value()[i] == doctest::Approx(0.0));

  Var g2 = tape.input(Tensor::vector({1.0, 1.0}));
  Var b2 = tape.input(Tensor::vector({0.0, 0.0}));
  Var y2 = layer_norm(tape.input(Tensor::vector({-1.0, 1.0})), g2, b2);
  const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
  CHECK(y2.value()[0] == doctest::Approx(-expect).epsilon(1e-12));
  CHECK(y2.value()[1] == doctest::Approx(expect).epsilon(1e-12));

  Var g0 = tape.input(Tensor::vector({0.0, 0.0}));
  Var b3 = tape.input(Tensor::vector({0.25, 0.5}));
  Var y3 = layer_norm(tape.input(Tensor::vector({3.0, -7.0})), g0, b3);
  CHECK(y3.value()[0] == doctest::Approx(0.25));
  CHECK(y3.value()[1] == doctest::Approx(0.5));
}

TEST_CASE("dropout modes") {
  Rng rng(7);
  Tape tape;
  Tensor x = random_tensor({17}, rng);
  Var v = tape.input(x);
  Var eval_out = dropout(v, 0.3, DropoutMode::Eval, nullptr);
  CHECK(eval_out.value().flat() == x.flat());  // bit-exact identity

  Var zero_rate = dropout(v, 0.0, DropoutMode::Train, &rng);
  CHECK(zero_rate.value().flat() == x.flat());

  CHECK_THROWS_AS(dropout(v, 1.0, DropoutMode::Train, &rng), InvalidRate);

  Tensor ones({10000});
  ones.flat().setOnes();
  Rng seeded(7);
  Tape t2;
  Var d = dropout(t2.input(ones), 0.3, DropoutMode::Train, &seeded);
  const double mean = d.value().flat().mean();
  CHECK(std::abs(mean - 1.0) < 0.03);  // law of large numbers
}

TEST_CASE("backward basics") {
  {
    Tape tape;
    Var x = tape.input(Tensor::vector({1.0, 2.0, 3.0}), true);
    tape.backward(sum(x));
    for (Index i = 0; i < 3; ++i) CHECK(x.grad()[i] == doctest::Approx(1.0));
  }
  {
    Tape tape;
    Var x = tape.input(Tensor::scalar(2.0), true);
    Var y = tape.input(Tensor::scalar(3.0), true);
    tape.backward(mul(x, y));
    CHECK(x.grad().value() == doctest::Approx(3.0));
    CHECK(y.grad().value() == doctest::Approx(2.0));
  }
  {
    Tape tape;
    Var x = tape.input(Tensor::vector({1.0, 2.0}), true);
    Var loss = sum(mul(x, x));
    tape.backward(loss);
    CHECK_THROWS_AS(tape.backward(loss), TapeFinalized);  // single-use tape
  }
  {
    Tape tape;
    Var x = tape.input(Tensor::vector({1.0, 2.0}), true);
    CHECK_THROWS_AS(tape.backward(x), NonScalarLoss);
  }
}

TEST_CASE("finite differences: per-op suite") {
  Rng rng(1234);
  auto check_unary = [&](const std::function<Var(Tape&, Var)>& f,
                         double lo = -2.0, double hi = 2.0) {
    for (int k = 0; k < 20; ++k) {
      Tensor x = random_tensor({4}, rng, lo, hi);
      CHECK(finite_diff_check(f, x) <= 1e-4);
      Tensor m = random_tensor({3, 4}, rng, lo, hi);
      CHECK(finite_diff_check(f, m) <= 1e-4);
    }
  };

  check_unary([](Tape& t, Var v) { return sum(sigmoid(v)); });
  check_unary([](Tape& t, Var v) { return sum(tanh_op(v)); });
  check_unary([](Tape& t, Var v) { return sum(exp_op(v)); });
  check_unary([](Tape& t, Var v) { return sum(log_op(v)); }, 0.2, 2.0);
  check_unary([](Tape& t, Var v) { return sum(mul(softmax(v), v)); });
  check_unary([](Tape& t, Var v) { return sum(mul(v, sigmoid(v))); });

  // relu away from the kink
  for (int k = 0; k < 20; ++k) {
    Tensor x = random_tensor({5}, rng);
    for (Index i = 0; i < x.size(); ++i)
      if (std::abs(x[i]) < 0.01) x[i] = 0.5;
    CHECK(finite_diff_check(
              [](Tape& t, Var v) { return sum(relu(v)); }, x) <= 1e-4);
  }

  // matmul / dot / transpose / concat / slice / stack composite
  for (int k = 0; k < 20; ++k) {
    Tensor x = random_tensor({2, 3}, rng);
    auto f = [](Tape& t, Var v) {
      Var w = t.input(Tensor::from_matrix(
          (RowMatrixXd(3, 2) << 0.3, -0.2, 0.1, 0.7, -0.5, 0.4).finished()));
      Var p = matmul(v, w);
      Var q = transpose(p);
      Var a = get_row(q, 0);
      Var b = get_row(q, 1);
      return dot(a, tanh_op(b));
    };
    CHECK(finite_diff_check(f, x) <= 1e-4);
  }

  // layer_norm with grad through x, gain and bias
  for (int k = 0; k < 20; ++k) {
    Tensor x = random_tensor({9}, rng);
    auto f = [](Tape& t, Var v) {
      Var xx = slice(v, 0, 5);
      Var g = slice(v, 5, 2);
      Var b = slice(v, 7, 2);
      Var rows = stack_rows({slice(xx, 0, 2), slice(xx, 2, 2)});
      Var y = layer_norm(rows, g, b);
      return sum(mul(y, y));
    };
    CHECK(finite_diff_check(f, x) <= 1e-4);
  }

  // softmax cross entropy composite
  for (int k = 0; k < 20; ++k) {
    Tensor x = random_tensor({5}, rng);
    auto f = [](Tape& t, Var v) { return cross_entropy_logits(v, 2); };
    CHECK(finite_diff_check(f, x) <= 1e-5);
  }

  // analytic: sum of squares has gradient 2x
  Tensor x = random_tensor({6}, rng);
  CHECK(finite_diff_check(
            [](Tape& t, Var v) { return sum(mul(v, v)); }, x) <= 1e-6);
  // constant function: both gradients zero
  CHECK(finite_diff_check(
            [](Tape& t, Var v) { return t.input(Tensor::scalar(1.5)); }, x) ==
        0.0);
}

TEST_CASE("adam_update") {
  {
    Parameter p("w", Tensor::vector({1.0, -2.0, 0.5}));
    p.grad = Tensor::vector({0.3, -1.7, 0.02});
    Tensor before = p.value;
    adam_update(p, 0.001);
    CHECK(p.step_count == 1);
    for (Index i = 0; i < 3; ++i) {
      // first-step Adam algebra: |delta| ~= lr for |g| >= 1e-3
      CHECK(std::abs(std::abs(p.value[i] - before[i]) - 0.001) < 1e-6);
    }
    CHECK(p.grad[0] == doctest::Approx(0.3));  // grad left intact
  }
  {
    Parameter p("w", Tensor::vector({1.0}));
    adam_update(p, 0.001);
    CHECK(p.value[0] == doctest::Approx(1.0));  // zero grad, fresh state
  }
  {
    Parameter p("w", Tensor::vector({1.0}));
    p.grad = Tensor::vector({1.0});
    adam_update(p, 0.001);
    const double v1 = p.value[0];
    CHECK(v1 < 1.0);
    adam_update(p, 0.001);
    CHECK(p.value[0] < v1);  // monotone under constant positive gradient
  }
}

TEST_CASE("seeded determinism") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    Tape tape;
    Tensor x = random_tensor({4, 4}, rng);
    Var v = tape.input(x, true);
    Var d = dropout(v, 0.3, DropoutMode::Train, &rng);
    Var loss = sum(mul(d, d));
    tape.backward(loss);
    return std::make_pair(loss.value().value(), v.grad());
  };
  auto [l1, g1] = run(99);
  auto [l2, g2] = run(99);
  CHECK(l1 == l2);  // bit-identical
  CHECK(g1.flat() == g2.flat());
}

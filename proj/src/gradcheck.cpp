#include "carryover/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "carryover/errors.hpp"
#include "carryover/model.hpp"

namespace carryover {

namespace {

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

double finite_diff_check(const std::function<Var(Tape&, Var)>& f,
                         const Tensor& x, double h) {
  Tape tape;
  Var vx = tape.input(x, /*requires_grad=*/true);
  Var loss = f(tape, vx);
  tape.backward(loss);
  const Tensor analytic = vx.grad();

  auto eval = [&](const Tensor& point) {
    Tape t;
    Var v = t.input(point, false);
    return f(t, v).value().value();
  };

  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    Tensor hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    const double fd = (eval(hi) - eval(lo)) / (2.0 * h);
    worst = std::max(worst, rel_err(analytic[i], fd));
  }
  return worst;
}

double finite_diff_check_params(const std::function<Var(Tape&)>& build_loss,
                                ParameterStore& params, double h) {
  params.zero_grads();
  {
    Tape tape;
    Var loss = build_loss(tape);
    tape.backward(loss);
  }

  auto eval = [&]() {
    Tape t;
    return build_loss(t).value().value();
  };

  double worst = 0.0;
  for (auto& p : params.all()) {
    for (Index i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + h;
      const double up = eval();
      p->value[i] = orig - h;
      const double down = eval();
      p->value[i] = orig;
      const double fd = (up - down) / (2.0 * h);
      worst = std::max(worst, rel_err(p->grad[i], fd));
    }
  }
  return worst;
}

double model_gradcheck(CarryoverModel& model,
                       const CarryoverInstance& instance,
                       const OrderingPolicy& ordering, double h) {
  auto build_loss = [&](Tape& tape) {
    return model.loss(tape, instance, ordering, DropoutMode::Eval, nullptr);
  };
  double worst = finite_diff_check_params(build_loss, model.params(), h);
  if (model.embeddings().trainable()) {
    worst = std::max(
        worst,
        finite_diff_check_params(build_loss, model.embeddings().params(), h));
  }
  return worst;
}

}  // namespace carryover

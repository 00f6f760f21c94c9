#pragma once

#include <functional>

#include "carryover/optim.hpp"
#include "carryover/tape.hpp"
#include "carryover/tensor.hpp"

namespace carryover {

/// Compare the tape gradient of a scalar function against central
/// differences. Returns the max relative error over all entries of x,
/// with denominator max(|analytic|, |numeric|, 1e-8).
double finite_diff_check(const std::function<Var(Tape&, Var)>& f,
                         const Tensor& x, double h = 1e-5);

/// Same check against every entry of every parameter in the store. The
/// builder must construct the loss deterministically (dropout in Eval mode)
/// through Tape::leaf so gradients land on the parameters.
double finite_diff_check_params(const std::function<Var(Tape&)>& build_loss,
                                ParameterStore& params, double h = 1e-5);

class CarryoverModel;
struct CarryoverInstance;
struct OrderingPolicy;

/// Finite-difference check of the full training loss over every model
/// parameter (and embedding row, when the table is trainable). Dropout
/// runs in Eval mode so the loss is deterministic. The step is larger than
/// the per-op default because the whole-model loss is big enough that
/// cancellation noise dominates tiny-gradient entries at h = 1e-5.
double model_gradcheck(CarryoverModel& model,
                       const CarryoverInstance& instance,
                       const OrderingPolicy& ordering, double h = 1e-4);

}  // namespace carryover

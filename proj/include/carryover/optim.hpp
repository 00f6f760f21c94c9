#pragma once

#include <memory>
#include <string>
#include <vector>

#include "carryover/rng.hpp"
#include "carryover/tensor.hpp"

namespace carryover {

/// Trainable tensor with its gradient and Adam moment state.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  long step_count = 0;

  explicit Parameter(std::string n, Tensor v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(value.zeros_like()),
        adam_m(value.zeros_like()),
        adam_v(value.zeros_like()) {}

  void zero_grad() { grad.set_zero(); }
};

/// Owns the parameters of one model; stable addresses, ordered by creation.
class ParameterStore {
 public:
  Parameter& create(const std::string& name, std::vector<Index> shape);

  /// Glorot-uniform matrix init: U(-a, a), a = sqrt(6/(fan_in+fan_out)).
  Parameter& create_glorot(const std::string& name, Index rows, Index cols,
                           Rng& rng);
  /// Uniform vector init with the same bound computed from fan = dim.
  Parameter& create_uniform_vec(const std::string& name, Index dim, Rng& rng);
  /// Zero-initialized bias.
  Parameter& create_zeros(const std::string& name, std::vector<Index> shape);

  Parameter* find(const std::string& name);
  const std::vector<std::unique_ptr<Parameter>>& all() const { return params_; }

  void zero_grads();
  Index total_size() const;

  /// Copies of current values, in creation order (best-epoch snapshots).
  std::vector<Tensor> snapshot_values() const;
  void restore_values(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Bias-corrected Adam step. The gradient is left intact for the caller.
void adam_update(Parameter& p, double lr, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8);

}  // namespace carryover

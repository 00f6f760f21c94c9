#include "carryover/optim.hpp"

#include <cmath>

#include "carryover/errors.hpp"

namespace carryover {

Parameter& ParameterStore::create(const std::string& name,
                                  std::vector<Index> shape) {
  params_.push_back(
      std::make_unique<Parameter>(name, Tensor(std::move(shape))));
  return *params_.back();
}

Parameter& ParameterStore::create_glorot(const std::string& name, Index rows,
                                         Index cols, Rng& rng) {
  Parameter& p = create(name, {rows, cols});
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (Index i = 0; i < p.value.size(); ++i) p.value[i] = rng.uniform(-a, a);
  return p;
}

Parameter& ParameterStore::create_uniform_vec(const std::string& name,
                                              Index dim, Rng& rng) {
  Parameter& p = create(name, {dim});
  const double a = std::sqrt(6.0 / static_cast<double>(dim));
  for (Index i = 0; i < dim; ++i) p.value[i] = rng.uniform(-a, a);
  return p;
}

Parameter& ParameterStore::create_zeros(const std::string& name,
                                        std::vector<Index> shape) {
  return create(name, std::move(shape));
}

Parameter* ParameterStore::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p->zero_grad();
}

Index ParameterStore::total_size() const {
  Index n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<Tensor> ParameterStore::snapshot_values() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParameterStore::restore_values(const std::vector<Tensor>& values) {
  if (values.size() != params_.size())
    throw ShapeMismatch("snapshot size does not match store");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require_same_shape(params_[i]->value, values[i]);
    params_[i]->value = values[i];
  }
}

void adam_update(Parameter& p, double lr, double beta1, double beta2,
                 double eps) {
  p.step_count += 1;
  const double t = static_cast<double>(p.step_count);
  auto& m = p.adam_m.flat();
  auto& v = p.adam_v.flat();
  const auto& g = p.grad.flat();
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
  const double mhat_scale = 1.0 / (1.0 - std::pow(beta1, t));
  const double vhat_scale = 1.0 / (1.0 - std::pow(beta2, t));
  p.value.flat() -=
      lr * (m * mhat_scale).cwiseQuotient(
               ((v * vhat_scale).cwiseSqrt().array() + eps).matrix());
}

}  // namespace carryover

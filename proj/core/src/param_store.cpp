#include "gawno/param_store.hpp"

#include <cmath>

namespace gawno {

Tensor ParamStore::add(const std::string& name, Tensor t) {
  if (contains(name)) throw StateError("parameter '" + name + "' already registered");
  if (!t.defined()) throw StateError("parameter '" + name + "' is undefined");
  t.set_requires_grad(true);
  index_[name] = order_.size();
  order_.push_back(name);
  params_.push_back(t);
  moment1_.emplace_back(static_cast<size_t>(t.size()), 0.0);
  moment2_.emplace_back(static_cast<size_t>(t.size()), 0.0);
  return t;
}

Tensor ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
  return params_[it->second];
}

std::int64_t ParamStore::parameter_count() const {
  std::int64_t n = 0;
  for (const Tensor& t : params_) n += t.size();
  return n;
}

void ParamStore::zero_grads() {
  for (Tensor& t : params_) t.zero_grad();
}

void adam_step(ParamStore& store, double lr, double beta1, double beta2,
               double eps, double weight_decay) {
  for (size_t k = 0; k < store.params_.size(); ++k) {
    if (!store.params_[k].has_grad()) {
      throw StateError("adam_step: parameter '" + store.order_[k] + "' has no gradient");
    }
  }
  store.step_count_ += 1;
  const double t = static_cast<double>(store.step_count_);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (size_t k = 0; k < store.params_.size(); ++k) {
    Tensor& p = store.params_[k];
    double* theta = p.data().data();
    const double* g = p.impl()->grad.data();
    double* m = store.moment1_[k].data();
    double* v = store.moment2_[k].data();
    const std::int64_t N = p.size();
    for (std::int64_t i = 0; i < N; ++i) {
      theta[i] -= lr * weight_decay * theta[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
    p.zero_grad();
  }
}

}  // namespace gawno

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gawno/tensor.hpp"

namespace gawno {

/// Named trainable tensors in insertion order, with per-entry Adam moment
/// buffers and a shared step counter. Entries always have requires_grad set.
class ParamStore {
 public:
  /// Registers a tensor under a unique name and returns a handle to it.
  Tensor add(const std::string& name, Tensor t);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor at(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }

  std::int64_t step_count() const { return step_count_; }

  /// Total scalar parameter count across all entries.
  std::int64_t parameter_count() const;

  void zero_grads();

  friend void adam_step(ParamStore& store, double lr, double beta1, double beta2,
                        double eps, double weight_decay);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> moment1_;
  std::vector<std::vector<double>> moment2_;
  std::int64_t step_count_ = 0;
};

/// One optimizer update over every entry: decoupled weight decay
/// (theta -= lr * wd * theta) followed by the bias-corrected Adam rule.
/// Requires every entry to carry a gradient; gradients are cleared after
/// the update and step_count advances by one.
void adam_step(ParamStore& store, double lr, double beta1, double beta2,
               double eps, double weight_decay);

}  // namespace gawno

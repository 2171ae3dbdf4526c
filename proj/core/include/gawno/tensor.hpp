#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gawno/errors.hpp"

namespace gawno {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated lazily on first accumulation
  bool requires_grad = false;

  /// Gradient buffer, zero-initialized to the tensor's size on first use.
  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor of doubles. Copying a Tensor copies a handle to
/// shared storage; use clone() for an independent copy of the values.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);

  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value) { return full({1}, value); }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  std::int64_t dim(int i) const { return impl_->shape[static_cast<size_t>(i)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(impl_->value.size()); }

  std::span<double> data() { return impl_->value; }
  std::span<const double> data() const { return impl_->value; }
  double& at(std::int64_t i) { return impl_->value[static_cast<size_t>(i)]; }
  double at(std::int64_t i) const { return impl_->value[static_cast<size_t>(i)]; }

  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    impl_->requires_grad = on;
    return *this;
  }

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const;
  std::span<double> grad_buffer() { return impl_->grad_buffer(); }
  void zero_grad() { impl_->grad.clear(); }

  /// Deep copy of the values; the copy carries no gradient and no tape links.
  Tensor clone() const;

  bool all_finite() const;

  detail::TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Reverse-mode tape. While an instance is alive it is the active graph for
/// its thread and differentiable ops append backward closures to it.
/// backward() replays the closures in reverse and then clears the tape, so a
/// Graph is good for one backward pass; gradients accumulate (+=) into every
/// reachable tensor with requires_grad set.
class Graph {
 public:
  Graph();
  ~Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  static Graph* active();

  void record(std::function<void()> step) { tape_.push_back(std::move(step)); }
  std::size_t size() const { return tape_.size(); }

  void backward(const Tensor& loss);
  void clear() { tape_.clear(); }

 private:
  std::vector<std::function<void()>> tape_;
  Graph* prev_ = nullptr;
};

/// True when a graph is active and at least one input is differentiable,
/// i.e. the op being built must record a backward closure.
bool tracing(std::initializer_list<const Tensor*> inputs);

}  // namespace gawno

#include "gawno/tensor.hpp"

#include <cmath>
#include <sstream>

namespace gawno {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, bool requires_grad) {
  for (std::int64_t d : shape) {
    if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + shape_str(shape));
  }
  impl_ = std::make_shared<detail::TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->value.assign(static_cast<size_t>(shape_numel(impl_->shape)), 0.0);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  if (static_cast<std::int64_t>(values.size()) != t.size()) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(t.shape()));
  }
  t.impl_->value = std::move(values);
  return t;
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  for (double& x : t.impl_->value) x = value;
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return impl_->value[0];
}

std::span<const double> Tensor::grad() const {
  if (impl_->grad.empty()) throw StateError("tensor has no gradient");
  return impl_->grad;
}

Tensor Tensor::clone() const {
  Tensor t;
  t.impl_ = std::make_shared<detail::TensorImpl>();
  t.impl_->shape = impl_->shape;
  t.impl_->value = impl_->value;
  return t;
}

bool Tensor::all_finite() const {
  for (double x : impl_->value) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

namespace {
thread_local Graph* g_active_graph = nullptr;
}

Graph::Graph() : prev_(g_active_graph) { g_active_graph = this; }

Graph::~Graph() { g_active_graph = prev_; }

Graph* Graph::active() { return g_active_graph; }

void Graph::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward() expects a scalar loss, got " + shape_str(loss.shape()));
  }
  loss.impl()->grad_buffer()[0] = 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
  tape_.clear();
}

bool tracing(std::initializer_list<const Tensor*> inputs) {
  if (Graph::active() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

}  // namespace gawno

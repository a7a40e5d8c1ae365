#include "reenact/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#if defined(__SSE__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

REENACT_NS_BEGIN

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << ", " << c << ", " << h << ", " << w << ")";
  return os.str();
}

Real* TensorImpl::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), Real(0));
  return grad.data();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(shape, Real(0), requires_grad);
}

Tensor Tensor::full(Shape shape, Real value, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data.assign(shape.numel(), value);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<Real> values, bool requires_grad) {
  if (values.size() != shape.numel()) {
    throw ShapeError("Tensor::from: " + std::to_string(values.size()) + " values for shape " +
                     shape.str());
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(Real value, bool requires_grad) {
  return full(Shape{1, 1, 1, 1}, value, requires_grad);
}

Real Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on non-scalar tensor " + shape().str());
  }
  return impl_->data[0];
}

Real Tensor::at(int n, int c, int h, int w) const { return impl_->data[offset(n, c, h, w)]; }

Tensor Tensor::detach() const { return clone(false); }

Tensor Tensor::clone(bool requires_grad) const { return from(shape(), impl_->data, requires_grad); }

void Tensor::backward() {
  if (numel() != 1) {
    throw ShapeError("backward() requires a scalar loss, got " + shape().str());
  }
  if (!impl_->requires_grad) {
    throw std::logic_error("backward() on a tensor that does not require grad");
  }
  if (impl_->released) throw std::logic_error("backward() called twice on the same graph");

  // Iterative post-order DFS gives a topological order of the graph.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack;
  stack.emplace_back(impl_.get(), 0);
  visited.insert(impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  impl_->grad_buffer()[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* node = *it;
    if (node->backward_fn && !node->grad.empty()) {
      node->backward_fn(*node);
      // Interior gradients are consumed; only leaves keep theirs.
      std::vector<Real>().swap(node->grad);
    }
  }
  for (TensorImpl* node : order) {
    if (node->backward_fn) node->released = true;
    node->backward_fn = nullptr;
    node->parents.clear();
  }
}

namespace {

bool any_requires_grad(const std::vector<Tensor>& inputs) {
  for (const Tensor& t : inputs) {
    if (t.defined() && t.requires_grad()) return true;
  }
  return false;
}

}  // namespace

Tensor make_result(Shape shape, std::vector<Real> data, const std::vector<Tensor>& inputs,
                   BackwardFn fn) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data = std::move(data);
  if (any_requires_grad(inputs)) {
    impl->requires_grad = true;
    for (const Tensor& t : inputs) {
      if (t.defined()) impl->parents.push_back(t.ptr());
    }
    impl->backward_fn = std::move(fn);
  }
  return Tensor(std::move(impl));
}

Tensor make_result(Shape shape, std::vector<Real> data, std::initializer_list<Tensor> inputs,
                   BackwardFn fn) {
  return make_result(shape, std::move(data), std::vector<Tensor>(inputs), std::move(fn));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

void flush_denormals() {
#if defined(__SSE__)
  _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
  _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
#endif
}

REENACT_NS_END

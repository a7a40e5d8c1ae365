#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reenact/config_ns.hpp"

REENACT_NS_BEGIN

/// Extents of a rank-4 NCHW tensor.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const { return static_cast<std::size_t>(n) * c * h * w; }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;
using BackwardFn = std::function<void(TensorImpl&)>;

struct TensorImpl {
  Shape shape;
  std::vector<Real> data;
  std::vector<Real> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  std::vector<ImplPtr> parents;
  BackwardFn backward_fn;
  /// Set once backward() has consumed the graph behind this node.
  bool released = false;

  /// Gradient buffer, allocated as zeros on first use.
  Real* grad_buffer();
};

/// Handle to a dense NCHW array with an optional gradient accumulator.
///
/// Copies share the same storage. Operations in ops.hpp build a graph of
/// handles; backward() walks that graph in reverse topological order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(ImplPtr impl) : impl_(std::move(impl)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<Real> values, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t numel() const { return impl_->shape.numel(); }

  std::span<const Real> data() const { return impl_->data; }
  std::span<Real> mutable_data() { return impl_->data; }
  std::span<const Real> grad() const { return impl_->grad; }
  std::span<Real> mutable_grad() { return impl_->grad; }
  bool has_grad() const { return !impl_->grad.empty(); }
  void zero_grad() { impl_->grad.clear(); }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag) { impl_->requires_grad = flag; }

  Real item() const;
  Real at(int n, int c, int h, int w) const;
  std::size_t offset(int n, int c, int h, int w) const {
    const Shape& s = impl_->shape;
    return ((static_cast<std::size_t>(n) * s.c + c) * s.h + h) * s.w + w;
  }

  /// New leaf holding a copy of the values, cut from the graph.
  Tensor detach() const;
  Tensor clone(bool requires_grad = false) const;

  /// Reverse-mode pass from this scalar. The graph behind it is released
  /// afterwards, so a second call on the same result is rejected.
  void backward();

  TensorImpl* impl() const { return impl_.get(); }
  const ImplPtr& ptr() const { return impl_; }

 private:
  ImplPtr impl_;
};

/// Builds an op result. Parents and the backward closure are only recorded
/// when at least one input requires a gradient.
Tensor make_result(Shape shape, std::vector<Real> data, std::initializer_list<Tensor> inputs,
                   BackwardFn fn);
Tensor make_result(Shape shape, std::vector<Real> data, const std::vector<Tensor>& inputs,
                   BackwardFn fn);

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

/// Sets flush-to-zero and denormals-are-zero for the calling thread.
/// Subnormal intermediates otherwise slow convolutions by an order of
/// magnitude; results stay deterministic.
void flush_denormals();

REENACT_NS_END

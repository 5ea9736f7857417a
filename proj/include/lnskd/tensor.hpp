#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lnskd/error.hpp"

namespace lnskd {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major tensor with an optional gradient buffer.
///
/// A tensor is a handle: copies share storage, so a parameter captured by
/// the tape and the same parameter held by a ParameterStore are one object.
/// Use clone() for an independent deep copy.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, bool requires_grad = false)
      : s_(std::make_shared<Storage>()) {
    check_shape(shape);
    s_->data.assign(shape_numel(shape), T(0));
    s_->shape = std::move(shape);
    s_->requires_grad = requires_grad;
  }

  BasicTensor(Shape shape, std::vector<T> data, bool requires_grad = false)
      : s_(std::make_shared<Storage>()) {
    check_shape(shape);
    if (shape_numel(shape) != data.size()) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_to_string(shape));
    }
    s_->shape = std::move(shape);
    s_->data = std::move(data);
    s_->requires_grad = requires_grad;
  }

  static BasicTensor scalar(T value, bool requires_grad = false) {
    return BasicTensor(Shape{1}, std::vector<T>{value}, requires_grad);
  }

  bool defined() const { return static_cast<bool>(s_); }
  bool is_same(const BasicTensor& other) const { return s_ == other.s_; }

  const Shape& shape() const { return s_->shape; }
  std::size_t rank() const { return s_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return s_->shape.at(axis); }
  std::size_t numel() const { return s_->data.size(); }

  std::span<T> data() { return s_->data; }
  std::span<const T> data() const { return s_->data; }
  T& operator[](std::size_t i) { return s_->data[i]; }
  const T& operator[](std::size_t i) const { return s_->data[i]; }

  T item() const {
    if (numel() != 1) {
      throw ShapeError("item() on tensor of shape " + shape_to_string(shape()));
    }
    return s_->data[0];
  }

  bool requires_grad() const { return s_->requires_grad; }
  void set_requires_grad(bool on) { s_->requires_grad = on; }

  bool has_grad() const { return !s_->grad.empty(); }
  std::span<T> grad() { return s_->grad; }
  std::span<const T> grad() const { return s_->grad; }

  /// Allocates a zeroed gradient buffer if none exists.
  std::span<T> ensure_grad() {
    if (s_->grad.empty()) s_->grad.assign(s_->data.size(), T(0));
    return s_->grad;
  }
  void zero_grad() {
    if (!s_->grad.empty()) std::fill(s_->grad.begin(), s_->grad.end(), T(0));
  }
  void drop_grad() { std::vector<T>().swap(s_->grad); }

  BasicTensor clone() const { return BasicTensor(s_->shape, s_->data, s_->requires_grad); }

  /// Deep copy of the values only: no gradient buffer, not tracked.
  BasicTensor detach() const { return BasicTensor(s_->shape, s_->data, false); }

 private:
  struct Storage {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
  };

  static void check_shape(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (shape[i] == 0) {
        throw ShapeError("dimension " + std::to_string(i) + " of shape " + shape_to_string(shape) +
                         " is zero");
      }
    }
  }

  std::shared_ptr<Storage> s_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Records differentiable operations in execution order and replays their
/// backward rules in reverse.
template <typename T>
class BasicTape {
 public:
  using BackwardFn = std::function<void()>;

  void record(BasicTensor<T> output, BackwardFn backward) {
    nodes_.push_back(Node{std::move(output), std::move(backward)});
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable tensor
  /// with requires_grad. Leaf gradients accumulate across calls;
  /// intermediate gradients are reset first.
  void backward(BasicTensor<T> loss) {
    if (!loss.defined() || loss.numel() != 1) {
      throw ShapeError("backward() needs a scalar loss, got shape " +
                       (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
    }
    for (auto& node : nodes_) node.output.drop_grad();
    if (!loss.requires_grad()) return;
    loss.ensure_grad()[0] += T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      if (it->output.has_grad()) it->backward();
    }
  }

 private:
  struct Node {
    BasicTensor<T> output;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

using Tape = BasicTape<float>;
using TapeD = BasicTape<double>;

}  // namespace lnskd

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ginet::diff {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// One vertex of the compute graph. A node owns its value and (lazily) its
// gradient; interior nodes keep their inputs alive through `parents` until
// backward() has run through them.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  bool leaf = true;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents that require one.
  std::function<void(Node&)> backward_fn;

  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

// Shared handle to a graph node. Copies alias the same storage.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<const T> values() const { return node_->value; }
  // Direct writes are meant for leaves (parameters, inputs).
  std::span<T> mutable_values() { return node_->value; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->leaf; }
  void set_requires_grad(bool on);
  bool has_grad() const { return node_->grad.size() == node_->value.size() && !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  // Fresh leaf holding a copy of the value.
  Tensor detach() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Builds the output node of an op. When recording is off or no input needs a
// gradient, the result is a plain leaf and `backward_fn` is dropped.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> value, std::vector<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward_fn);

// Reverse-mode sweep from a one-element loss. Every requires-grad leaf that
// the loss depends on receives (accumulates) its gradient; the traversed
// graph is released afterwards, so a second call on the same loss throws
// GraphConsumed.
template <typename T>
void backward(const Tensor<T>& loss);

// Throws NumericFailure naming `what` if any value is NaN or infinite.
template <typename T>
void check_finite(const Tensor<T>& t, const char* what);

}  // namespace ginet::diff

#include "ginet/diff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ginet/error.hpp"

namespace ginet::diff {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value.assign(diff::numel(shape), T(0));
  node_->shape = std::move(shape);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad)
    : node_(std::make_shared<Node<T>>()) {
  if (values.size() != diff::numel(shape)) {
    throw Error(ErrorCode::kShapeMismatch, to_string(shape) + " needs " +
                                               std::to_string(diff::numel(shape)) + " values, got " +
                                               std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw Error(ErrorCode::kShapeMismatch, "item() on " + to_string(shape()));
  return node_->value[0];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool on) {
  node_->requires_grad = on;
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->value, false);
}

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> value, std::vector<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward_fn) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  const bool needs = g_grad_enabled &&
                     std::any_of(inputs.begin(), inputs.end(), [](const Tensor<T>& t) {
                       return t.defined() && t.requires_grad();
                     });
  if (needs) {
    node->requires_grad = true;
    node->leaf = false;
    for (auto& in : inputs) node->parents.push_back(in.node_ptr());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
void backward(const Tensor<T>& loss) {
  Node<T>* root = loss.node();
  if (root->consumed) {
    throw Error(ErrorCode::kGraphConsumed, "backward() already ran through this graph");
  }
  if (loss.numel() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "backward() needs a one-element loss, got " +
                                               to_string(loss.shape()));
  }
  if (!root->requires_grad) {
    throw Error(ErrorCode::kInvalidArgument, "loss does not depend on any trainable tensor");
  }

  // Iterative post-order DFS gives a topological order without recursion
  // depth limits on long graphs.
  std::vector<std::shared_ptr<Node<T>>> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<std::shared_ptr<Node<T>>, std::size_t>> stack{{loss.node_ptr(), 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      std::shared_ptr<Node<T>> p = node->parents[next++];
      if (p && p->requires_grad && visited.insert(p.get()).second) stack.push_back({std::move(p), 0});
    } else {
      order.push_back(std::move(node));
      stack.pop_back();
    }
  }

  root->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = it->get();
    if (node->leaf) {
      node->ensure_grad();
      continue;
    }
    node->ensure_grad();
    if (node->backward_fn) node->backward_fn(*node);
    node->backward_fn = nullptr;
    node->parents.clear();
    node->consumed = true;
    if (node != root) std::vector<T>().swap(node->grad);
  }
  root->consumed = true;
}

template <typename T>
void check_finite(const Tensor<T>& t, const char* what) {
  for (T v : t.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNumericFailure, std::string(what) + " is not finite");
  }
}

#define GINET_INSTANTIATE(T)                                                                  \
  template class Tensor<T>;                                                                   \
  template Tensor<T> make_result(Shape, std::vector<T>, std::vector<Tensor<T>>,               \
                                 std::function<void(Node<T>&)>);                              \
  template void backward(const Tensor<T>&);                                                   \
  template void check_finite(const Tensor<T>&, const char*);

GINET_INSTANTIATE(float)
GINET_INSTANTIATE(double)

}  // namespace ginet::diff

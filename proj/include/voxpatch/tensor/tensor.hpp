// Copyright 2026 Voxpatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VOXPATCH_TENSOR_TENSOR_HPP_
#define VOXPATCH_TENSOR_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "voxpatch/errors.hpp"

namespace voxpatch {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

// One storage node of the computation graph. Interior nodes carry a
// backward closure and edges to their inputs; leaves (parameters, constant
// inputs) carry neither.
template <typename Real>
struct TensorNode {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // allocated lazily by backward()
  bool requires_grad = false;

  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  std::size_t numel() const { return value.size(); }

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), Real(0));
  }
};

// Thread-local switch: when off, ops compute values but record no graph.
// Inference runs under a NoGradGuard so parameter tensors do not pin
// activation history.
inline thread_local bool g_grad_enabled = true;

struct NoGradGuard {
  NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
  ~NoGradGuard() { g_grad_enabled = prev; }
  bool prev;
};

inline bool grad_enabled() { return g_grad_enabled; }

// Cheap handle to a TensorNode. Copies share storage, so a Tensor can be
// passed around by value while gradients still reach the one true buffer.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape) { return full(std::move(shape), Real(0)); }

  static Tensor full(Shape shape, Real v) {
    Tensor t;
    t.node_ = std::make_shared<TensorNode<Real>>();
    t.node_->shape = std::move(shape);
    t.node_->value.assign(shape_numel(t.node_->shape), v);
    return t;
  }

  static Tensor scalar(Real v) { return from_data({1}, {v}); }

  static Tensor from_data(Shape shape, std::vector<Real> data) {
    if (shape_numel(shape) != data.size()) {
      throw ShapeError("from_data: " + shape_str(shape) + " does not hold " +
                       std::to_string(data.size()) + " values");
    }
    Tensor t;
    t.node_ = std::make_shared<TensorNode<Real>>();
    t.node_->shape = std::move(shape);
    t.node_->value = std::move(data);
    return t;
  }

  bool defined() const { return node_ != nullptr; }

  const Shape& shape() const { return node_->shape; }
  std::size_t ndim() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape[i]; }
  std::size_t numel() const { return node_->value.size(); }

  const std::vector<Real>& value() const { return node_->value; }
  // Direct write access. Only meaningful on tensors no op has consumed yet
  // (parameters being initialized, input buffers being filled).
  std::vector<Real>& mutable_value() { return node_->value; }

  Real item() const {
    if (numel() != 1) {
      throw ContractError("item(): tensor has " + std::to_string(numel()) +
                          " elements");
    }
    return node_->value[0];
  }

  Real at(std::size_t i) const { return node_->value[i]; }
  Real at(std::size_t r, std::size_t c) const {
    return node_->value[r * node_->shape[1] + c];
  }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool b) {
    node_->requires_grad = b;
    return *this;
  }

  bool has_grad() const { return node_ && !node_->grad.empty(); }
  const std::vector<Real>& grad() const {
    if (node_->grad.empty()) {
      throw ContractError("grad accessed before backward()");
    }
    return node_->grad;
  }
  std::vector<Real>& mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() {
    if (!node_->grad.empty()) {
      node_->grad.assign(node_->value.size(), Real(0));
    }
  }

  std::shared_ptr<TensorNode<Real>> node() const { return node_; }

  explicit Tensor(std::shared_ptr<TensorNode<Real>> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<TensorNode<Real>> node_;
};

// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
// requires_grad node reachable through the recorded graph; leaf gradients
// add onto whatever is already there (batch accumulation), interior nodes
// are fresh per forward. Graph edges are released afterwards.
template <typename Real>
void backward(const Tensor<Real>& loss) {
  if (loss.numel() != 1) {
    throw ContractError("backward() needs a scalar loss, got " +
                        shape_str(loss.shape()));
  }
  auto root = loss.node();
  if (!root->requires_grad) {
    throw ContractError("backward() on a tensor that requires no grad");
  }

  // Iterative post-order DFS over parent edges.
  std::vector<TensorNode<Real>*> order;
  std::unordered_set<TensorNode<Real>*> visited;
  struct Frame {
    TensorNode<Real>* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      TensorNode<Real>* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  for (auto* n : order) n->ensure_grad();
  root->grad[0] += Real(1);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode<Real>* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }

  // Drop the graph so activations free eagerly and a second sweep cannot
  // silently reuse stale closures.
  for (auto* n : order) {
    n->backward_fn = nullptr;
    n->parents.clear();
  }
}

namespace detail {

// Record an interior node if grad mode is on and any input participates.
// The closure parameter is a free template so lambdas deduce cleanly.
template <typename Real, typename Fn>
void record(Tensor<Real>& out,
            std::initializer_list<Tensor<Real>> inputs, Fn&& backward_fn) {
  if (!grad_enabled()) return;
  bool any = false;
  for (const auto& t : inputs) {
    if (t.defined() && t.requires_grad()) any = true;
  }
  if (!any) return;
  auto node = out.node();
  node->requires_grad = true;
  for (const auto& t : inputs) {
    if (t.defined()) node->parents.push_back(t.node());
  }
  node->backward_fn = std::forward<Fn>(backward_fn);
}

}  // namespace detail

}  // namespace voxpatch

#endif  // VOXPATCH_TENSOR_TENSOR_HPP_

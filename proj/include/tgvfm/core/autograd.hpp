// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tgvfm/core/tensor.hpp"

namespace tgvfm {

/// One vertex of the reverse-mode tape. Interior nodes own a closure that
/// pushes `grad` into their parents' gradient buffers.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer();
};

/// Shared handle to a tape node. Copying a Var aliases the same node, which is
/// how parameter sharing between modules is expressed.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  static Var parameter(Tensor value) { return Var(std::move(value), true); }

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  int dim(std::size_t i) const { return node_->value.dim(i); }
  std::size_t numel() const { return node_->value.numel(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  /// Accumulated gradient; zeros of the value's shape when nothing flowed in.
  Tensor grad() const;
  void zero_grad();

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }
  bool same_node(const Var& other) const { return node_ == other.node_; }

  /// Cuts the tape: returns a constant holding the same value.
  Var detach() const { return Var(node_->value, false); }

 private:
  friend Var make_result(Tensor value, const std::vector<Var>& parents, std::function<void(Node&)> backward_fn);
  std::shared_ptr<Node> node_;
};

/// Builds an op output. The backward closure is dropped when no parent needs a
/// gradient or when grad recording is disabled.
Var make_result(Tensor value, const std::vector<Var>& parents, std::function<void(Node&)> backward_fn);

/// Reverse sweep from a single-element output. Gradients accumulate into the
/// leaves; call zero_grad() between steps.
void backward(const Var& root);

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace tgvfm

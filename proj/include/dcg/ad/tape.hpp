// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Reverse-mode autodiff. A Tape records every primitive in execution order,
// which is already a topological order; backward() walks it once in reverse.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcg/ad/tensor.hpp"

namespace dcg::ad {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Tape {
 public:
  Tape() = default;
  // With gradients disabled parameters enter as constants and no backward
  // closures are kept.
  explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor t);
  Var leaf(Tensor t);  // requires grad; gradient kept on the tape
  // A parameter is recorded once per tape; its gradient accumulates
  // directly into Parameter::grad.
  Var param(Parameter& p);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Used by operator implementations.
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);
  Tensor& grad_mut(std::uint32_t id);
  const Tensor& grad_of(std::uint32_t id) const;
  const Tensor& value_of(std::uint32_t id) const;
  bool needs_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    const Tensor* ext_value = nullptr;
    Tensor* ext_grad = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;  // stable references across record()
  std::unordered_map<const Parameter*, std::uint32_t> params_;
  bool grad_enabled_ = true;
};

}  // namespace dcg::ad

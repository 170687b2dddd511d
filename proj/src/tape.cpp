// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/ad/tape.hpp"

#include <cmath>
#include <sstream>

namespace dcg::ad {

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> values)
    : shape(std::move(shp)), data(std::move(values)) {
  if (data.size() != numel()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                     shape_str());
  }
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::row(std::vector<double> v) {
  auto n = v.size();
  return Tensor({1, n}, std::move(v));
}

Tensor xavier(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(rows, cols);
  for (auto& x : t.data) x = dist(rng);
  return t;
}

Tensor normal(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(rows, cols);
  for (auto& x : t.data) x = dist(rng);
  return t;
}

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor t) {
  Node n;
  n.value = std::move(t);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Tensor t) {
  Node n;
  n.value = std::move(t);
  n.requires_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::param(Parameter& p) {
  auto it = params_.find(&p);
  if (it != params_.end()) return {this, it->second};
  if (!grad_enabled_) {
    Node n;
    n.ext_value = &p.value;
    nodes_.push_back(std::move(n));
    auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
    params_.emplace(&p, id);
    return {this, id};
  }
  if (!p.grad.same_shape(p.value)) p.grad = Tensor(p.value.rows(), p.value.cols());
  Node n;
  n.ext_value = &p.value;
  n.ext_grad = &p.grad;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  params_.emplace(&p, id);
  return {this, id};
}

const Tensor& Tape::value_of(std::uint32_t id) const {
  const auto& n = nodes_[id];
  return n.ext_value ? *n.ext_value : n.value;
}

const Tensor& Tape::value(Var v) const { return value_of(v.id); }

Tensor& Tape::grad_mut(std::uint32_t id) {
  auto& n = nodes_[id];
  if (n.ext_grad) return *n.ext_grad;
  if (n.grad.data.empty()) {
    const auto& v = value_of(id);
    n.grad = Tensor(v.rows(), v.cols());
  }
  return n.grad;
}

const Tensor& Tape::grad_of(std::uint32_t id) const {
  const auto& n = nodes_[id];
  return n.ext_grad ? *n.ext_grad : n.grad;
}

const Tensor& Tape::grad(Var v) const { return grad_of(v.id); }

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (const auto& in : inputs) n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

void Tape::backward(Var loss) {
  const auto& lv = value(loss);
  if (lv.numel() != 1) throw ShapeError("backward: loss must be a scalar, got " + lv.shape_str());
  if (!nodes_[loss.id].requires_grad) return;
  grad_mut(loss.id).data[0] += 1.0;
  // A node's gradient buffer is allocated only once a consumer has written
  // to it, so unreached nodes are skipped.
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.backward && !n.grad.data.empty()) n.backward(*this, i);
  }
}

}  // namespace dcg::ad

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <span>
#include <string>
#include <unordered_map>

#include "dcg/ad/tape.hpp"

namespace dcg::train {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay:
//   w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + wd * w)
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}
  void step(std::span<ad::Parameter* const> params);
  std::size_t steps() const { return t_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  AdamWConfig cfg_;
  std::size_t t_ = 0;
  std::unordered_map<const ad::Parameter*, Moments> state_;
};

// Scales all gradients so their global L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(std::span<ad::Parameter* const> params, double max_norm);

}  // namespace dcg::train

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/train/optimizer.hpp"

#include <cmath>

namespace dcg::train {

void AdamW::step(std::span<ad::Parameter* const> params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto* p : params) {
    auto& st = state_[p];
    const auto n = p->value.data.size();
    if (st.m.size() != n) {
      st.m.assign(n, 0.0);
      st.v.assign(n, 0.0);
    }
    if (p->grad.data.size() != n) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = p->grad.data[i];
      st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g;
      st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mh = st.m[i] / bc1;
      const double vh = st.v[i] / bc2;
      p->value.data[i] -= cfg_.learning_rate * (mh / (std::sqrt(vh) + cfg_.eps) + cfg_.weight_decay * p->value.data[i]);
    }
  }
}

double clip_grad_norm(std::span<ad::Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (auto* p : params)
    for (double g : p->grad.data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / (norm + 1e-12);
    for (auto* p : params)
      for (double& g : p->grad.data) g *= s;
  }
  return norm;
}

}  // namespace dcg::train

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace dcg::ad {

namespace {

double rel_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  double denom = std::max(std::sqrt(na), std::sqrt(nn));
  if (denom == 0.0) return 0.0;
  return std::sqrt(diff) / denom;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> inputs, double eps) {
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.leaf(t));
    auto loss = f(tape, vars);
    tape.backward(loss);
    for (const auto& v : vars) {
      const auto& g = tape.grad(v);
      analytic.push_back(g.data.empty() ? std::vector<double>(v.value().numel(), 0.0) : g.data);
    }
  }
  auto eval = [&] {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.constant(t));
    return f(tape, vars).value().data[0];
  };
  GradCheckResult res;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<double> numeric(inputs[i].numel());
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      double orig = inputs[i].data[k];
      inputs[i].data[k] = orig + eps;
      double up = eval();
      inputs[i].data[k] = orig - eps;
      double down = eval();
      inputs[i].data[k] = orig;
      numeric[k] = (up - down) / (2 * eps);
    }
    res.per_input.push_back(rel_error(analytic[i], numeric));
  }
  res.max_rel_error = res.per_input.empty() ? 0.0 : *std::max_element(res.per_input.begin(), res.per_input.end());
  return res;
}

GradCheckResult grad_check_params(const std::function<Var(Tape&)>& f, std::vector<Parameter*> params,
                                  double eps) {
  for (auto* p : params) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
  {
    Tape tape;
    tape.backward(f(tape));
  }
  GradCheckResult res;
  for (auto* p : params) {
    std::vector<double> numeric(p->value.numel());
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      double orig = p->value.data[k];
      p->value.data[k] = orig + eps;
      double up;
      {
        Tape tape;
        up = f(tape).value().data[0];
      }
      p->value.data[k] = orig - eps;
      double down;
      {
        Tape tape;
        down = f(tape).value().data[0];
      }
      p->value.data[k] = orig;
      numeric[k] = (up - down) / (2 * eps);
    }
    res.per_input.push_back(rel_error(p->grad.data, numeric));
  }
  res.max_rel_error = res.per_input.empty() ? 0.0 : *std::max_element(res.per_input.begin(), res.per_input.end());
  return res;
}

}  // namespace dcg::ad

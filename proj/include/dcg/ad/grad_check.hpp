// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <functional>
#include <vector>

#include "dcg/ad/tape.hpp"

namespace dcg::ad {

using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;  // max over inputs of |g - fd| / max(|g|, |fd|)
  std::vector<double> per_input;
};

// Central differences with step `eps` on every element of every input.
// Relative error is measured per input tensor in the 2-norm, which stays
// meaningful when individual gradient entries are near zero.
GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> inputs, double eps = 1e-5);

// Same, for gradients flowing into parameters of a model.
GradCheckResult grad_check_params(const std::function<Var(Tape&)>& f, std::vector<Parameter*> params,
                                  double eps = 1e-5);

}  // namespace dcg::ad

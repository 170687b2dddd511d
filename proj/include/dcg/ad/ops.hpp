// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Differentiable primitives over rank-2 tensors. Shapes must match exactly;
// the only broadcast is add_bias (row vector added to every row).

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcg/ad/tape.hpp"

namespace dcg::ad {

Var matmul(Var a, Var b);       // (m x k) (k x n)
Var matmul_nt(Var a, Var b);    // (m x k) (n x k)^T
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var add_bias(Var a, Var bias);  // bias is 1 x n
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_const(Var a, const Tensor& c);  // e.g. attention masks
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::span<const std::uint32_t> rows);
Var scatter_add_rows(Var a, std::span<const std::uint32_t> rows, std::size_t out_rows);
Var scale_rows(Var a, Var w);   // w is (rows x 1)
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);
// Softmax of a column vector within groups: out[e] = exp(x[e]) / sum over
// e' with group[e'] == group[e].
Var segment_softmax(Var scores, std::span<const std::uint32_t> group, std::size_t groups);
Var log(Var a);
Var exp(Var a);
Var leaky_relu(Var a, double slope = 0.2);
Var relu(Var a);
Var elu(Var a);
Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);
Var sum(Var a);   // 1 x 1
Var mean(Var a);  // 1 x 1
// out[i] = a[i, cols[i]], shape (rows x 1).
Var pick(Var a, std::span<const std::uint32_t> cols);

}  // namespace dcg::ad

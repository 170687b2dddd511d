// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/ad/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace dcg::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;
using CMap = Eigen::Map<const RowMat>;

CMap view(const Tensor& t) {
  return CMap(t.data.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
Map view(Tensor& t) {
  return Map(t.data.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

void require_rank2(const char* op, const Tensor& t) {
  if (t.shape.size() != 2) throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + t.shape_str());
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

void same(const char* op, const Tensor& a, const Tensor& b) {
  require_rank2(op, a);
  if (!a.same_shape(b)) mismatch(op, a, b);
}

// Accumulates `g` into input `v` if it needs a gradient.
template <typename F>
void acc(Tape& t, Var v, F&& f) {
  if (t.needs_grad(v.id)) f(t.grad_mut(v.id));
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  const auto& A = a.value();
  const auto& B = b.value();
  require_rank2("matmul", A);
  require_rank2("matmul", B);
  if (A.cols() != B.rows()) mismatch("matmul", A, B);
  Tensor C(A.rows(), B.cols());
  view(C).noalias() = view(A) * view(B);
  return t.record(std::move(C), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self));
    acc(tp, a, [&](Tensor& ga) { view(ga).noalias() += G * view(tp.value_of(b.id)).transpose(); });
    acc(tp, b, [&](Tensor& gb) { view(gb).noalias() += view(tp.value_of(a.id)).transpose() * G; });
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *a.tape;
  const auto& A = a.value();
  const auto& B = b.value();
  require_rank2("matmul_nt", A);
  require_rank2("matmul_nt", B);
  if (A.cols() != B.cols()) mismatch("matmul_nt", A, B);
  Tensor C(A.rows(), B.rows());
  view(C).noalias() = view(A) * view(B).transpose();
  return t.record(std::move(C), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self));
    acc(tp, a, [&](Tensor& ga) { view(ga).noalias() += G * view(tp.value_of(b.id)); });
    acc(tp, b, [&](Tensor& gb) { view(gb).noalias() += G.transpose() * view(tp.value_of(a.id)); });
  });
}

Var transpose(Var a) {
  const auto& A = a.value();
  require_rank2("transpose", A);
  Tensor C(A.cols(), A.rows());
  view(C) = view(A).transpose();
  return a.tape->record(std::move(C), {a}, [a](Tape& tp, std::uint32_t self) {
    acc(tp, a, [&](Tensor& ga) { view(ga) += view(tp.grad_of(self)).transpose(); });
  });
}

Var add(Var a, Var b) {
  same("add", a.value(), b.value());
  Tensor C = a.value();
  view(C) += view(b.value());
  return a.tape->record(std::move(C), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    acc(tp, a, [&](Tensor& ga) { view(ga) += view(G); });
    acc(tp, b, [&](Tensor& gb) { view(gb) += view(G); });
  });
}

Var sub(Var a, Var b) {
  same("sub", a.value(), b.value());
  Tensor C = a.value();
  view(C) -= view(b.value());
  return a.tape->record(std::move(C), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    acc(tp, a, [&](Tensor& ga) { view(ga) += view(G); });
    acc(tp, b, [&](Tensor& gb) { view(gb) -= view(G); });
  });
}

Var add_bias(Var a, Var bias) {
  const auto& A = a.value();
  const auto& b = bias.value();
  require_rank2("add_bias", A);
  if (b.rows() != 1 || b.cols() != A.cols()) mismatch("add_bias", A, b);
  Tensor C = A;
  view(C).rowwise() += view(b).row(0);
  return a.tape->record(std::move(C), {a, bias}, [a, bias](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self));
    acc(tp, a, [&](Tensor& ga) { view(ga) += G; });
    acc(tp, bias, [&](Tensor& gb) { view(gb).row(0) += G.colwise().sum(); });
  });
}

Var mul(Var a, Var b) {
  same("mul", a.value(), b.value());
  Tensor C = a.value();
  view(C).array() *= view(b.value()).array();
  return a.tape->record(std::move(C), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self)).array();
    acc(tp, a, [&](Tensor& ga) { view(ga).array() += G * view(tp.value_of(b.id)).array(); });
    acc(tp, b, [&](Tensor& gb) { view(gb).array() += G * view(tp.value_of(a.id)).array(); });
  });
}

Var scale(Var a, double c) {
  Tensor C = a.value();
  view(C) *= c;
  return a.tape->record(std::move(C), {a}, [a, c](Tape& tp, std::uint32_t self) {
    acc(tp, a, [&](Tensor& ga) { view(ga) += c * view(tp.grad_of(self)); });
  });
}

Var add_const(Var a, const Tensor& c) {
  same("add_const", a.value(), c);
  Tensor C = a.value();
  view(C) += view(c);
  return a.tape->record(std::move(C), {a}, [a](Tape& tp, std::uint32_t self) {
    acc(tp, a, [&](Tensor& ga) { view(ga) += view(tp.grad_of(self)); });
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  std::size_t rows = parts[0].rows(), cols = 0;
  for (const auto& p : parts) {
    require_rank2("concat_cols", p.value());
    if (p.rows() != rows) mismatch("concat_cols", parts[0].value(), p.value());
    cols += p.cols();
  }
  Tensor C(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    view(C).middleCols(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(p.cols())) = view(p.value());
    off += p.cols();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape->record(std::move(C), parts, [ins, offsets](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self));
    for (std::size_t i = 0; i < ins.size(); ++i) {
      acc(tp, ins[i], [&](Tensor& gi) {
        view(gi) += G.middleCols(static_cast<Eigen::Index>(offsets[i]), static_cast<Eigen::Index>(gi.cols()));
      });
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  std::size_t cols = parts[0].cols(), rows = 0;
  for (const auto& p : parts) {
    require_rank2("concat_rows", p.value());
    if (p.cols() != cols) mismatch("concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Tensor C(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    std::copy(p.value().data.begin(), p.value().data.end(), C.data.begin() + static_cast<std::ptrdiff_t>(off * cols));
    off += p.rows();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape->record(std::move(C), parts, [ins, offsets, cols](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    for (std::size_t i = 0; i < ins.size(); ++i) {
      acc(tp, ins[i], [&](Tensor& gi) {
        const double* src = G.data.data() + offsets[i] * cols;
        for (std::size_t k = 0; k < gi.data.size(); ++k) gi.data[k] += src[k];
      });
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const auto& A = a.value();
  require_rank2("slice_cols", A);
  if (begin > end || end > A.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for " + A.shape_str());
  }
  Tensor C(A.rows(), end - begin);
  view(C) = view(A).middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
  return a.tape->record(std::move(C), {a}, [a, begin](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    acc(tp, a, [&](Tensor& ga) {
      view(ga).middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(G.cols())) += view(G);
    });
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const auto& A = a.value();
  require_rank2("slice_rows", A);
  if (begin > end || end > A.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for " + A.shape_str());
  }
  std::size_t cols = A.cols();
  Tensor C(end - begin, cols);
  std::copy(A.data.begin() + static_cast<std::ptrdiff_t>(begin * cols),
            A.data.begin() + static_cast<std::ptrdiff_t>(end * cols), C.data.begin());
  return a.tape->record(std::move(C), {a}, [a, begin, cols](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    acc(tp, a, [&](Tensor& ga) {
      double* dst = ga.data.data() + begin * cols;
      for (std::size_t k = 0; k < G.data.size(); ++k) dst[k] += G.data[k];
    });
  });
}

Var gather_rows(Var a, std::span<const std::uint32_t> rows) {
  const auto& A = a.value();
  require_rank2("gather_rows", A);
  std::size_t cols = A.cols();
  Tensor C(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= A.rows()) throw ShapeError("gather_rows: row index out of range for " + A.shape_str());
    std::copy_n(A.data.begin() + static_cast<std::ptrdiff_t>(rows[i] * cols), cols,
                C.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  std::vector<std::uint32_t> idx(rows.begin(), rows.end());
  return a.tape->record(std::move(C), {a}, [a, idx, cols](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    acc(tp, a, [&](Tensor& ga) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        double* dst = ga.data.data() + idx[i] * cols;
        const double* src = G.data.data() + i * cols;
        for (std::size_t k = 0; k < cols; ++k) dst[k] += src[k];
      }
    });
  });
}

Var scatter_add_rows(Var a, std::span<const std::uint32_t> rows, std::size_t out_rows) {
  const auto& A = a.value();
  require_rank2("scatter_add_rows", A);
  if (rows.size() != A.rows()) throw ShapeError("scatter_add_rows: index count does not match " + A.shape_str());
  std::size_t cols = A.cols();
  Tensor C(out_rows, cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= out_rows) throw ShapeError("scatter_add_rows: target row out of range");
    double* dst = C.data.data() + rows[i] * cols;
    const double* src = A.data.data() + i * cols;
    for (std::size_t k = 0; k < cols; ++k) dst[k] += src[k];
  }
  std::vector<std::uint32_t> idx(rows.begin(), rows.end());
  return a.tape->record(std::move(C), {a}, [a, idx, cols](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    acc(tp, a, [&](Tensor& ga) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = G.data.data() + idx[i] * cols;
        double* dst = ga.data.data() + i * cols;
        for (std::size_t k = 0; k < cols; ++k) dst[k] += src[k];
      }
    });
  });
}

Var scale_rows(Var a, Var w) {
  const auto& A = a.value();
  const auto& W = w.value();
  require_rank2("scale_rows", A);
  if (W.rows() != A.rows() || W.cols() != 1) mismatch("scale_rows", A, W);
  Tensor C = A;
  view(C).array().colwise() *= view(W).col(0).array();
  return a.tape->record(std::move(C), {a, w}, [a, w](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self));
    acc(tp, a, [&](Tensor& ga) {
      view(ga).array() += G.array().colwise() * view(tp.value_of(w.id)).col(0).array();
    });
    acc(tp, w, [&](Tensor& gw) {
      view(gw).col(0) += (G.array() * view(tp.value_of(a.id)).array()).rowwise().sum().matrix();
    });
  });
}

Var softmax_rows(Var a) {
  const auto& A = a.value();
  require_rank2("softmax_rows", A);
  Tensor C = A;
  auto M = view(C);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    double mx = M.row(r).maxCoeff();
    if (!std::isfinite(mx)) mx = 0.0;
    M.row(r) = (M.row(r).array() - mx).exp();
    double s = M.row(r).sum();
    M.row(r) /= s;
  }
  return a.tape->record(std::move(C), {a}, [a](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self));
    auto Y = view(tp.value_of(self));
    acc(tp, a, [&](Tensor& ga) {
      auto GA = view(ga);
      for (Eigen::Index r = 0; r < Y.rows(); ++r) {
        double dot = G.row(r).dot(Y.row(r));
        GA.row(r).array() += Y.row(r).array() * (G.row(r).array() - dot);
      }
    });
  });
}

Var log_softmax_rows(Var a) {
  const auto& A = a.value();
  require_rank2("log_softmax_rows", A);
  Tensor C = A;
  auto M = view(C);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    double mx = M.row(r).maxCoeff();
    double lse = mx + std::log((M.row(r).array() - mx).exp().sum());
    M.row(r).array() -= lse;
  }
  return a.tape->record(std::move(C), {a}, [a](Tape& tp, std::uint32_t self) {
    auto G = view(tp.grad_of(self));
    auto Y = view(tp.value_of(self));
    acc(tp, a, [&](Tensor& ga) {
      auto GA = view(ga);
      for (Eigen::Index r = 0; r < Y.rows(); ++r) {
        double gs = G.row(r).sum();
        GA.row(r).array() += G.row(r).array() - Y.row(r).array().exp() * gs;
      }
    });
  });
}

Var segment_softmax(Var scores, std::span<const std::uint32_t> group, std::size_t groups) {
  const auto& S = scores.value();
  if (S.cols() != 1 || S.rows() != group.size()) {
    throw ShapeError("segment_softmax: expected (" + std::to_string(group.size()) + " x 1), got " + S.shape_str());
  }
  std::vector<double> mx(groups, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < group.size(); ++e) {
    if (group[e] >= groups) throw ShapeError("segment_softmax: group id out of range");
    mx[group[e]] = std::max(mx[group[e]], S.data[e]);
  }
  Tensor C(S.rows(), 1);
  std::vector<double> denom(groups, 0.0);
  for (std::size_t e = 0; e < group.size(); ++e) {
    C.data[e] = std::exp(S.data[e] - mx[group[e]]);
    denom[group[e]] += C.data[e];
  }
  for (std::size_t e = 0; e < group.size(); ++e) C.data[e] /= denom[group[e]];
  std::vector<std::uint32_t> grp(group.begin(), group.end());
  return scores.tape->record(std::move(C), {scores}, [scores, grp, groups](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    const auto& Y = tp.value_of(self);
    std::vector<double> dot(groups, 0.0);
    for (std::size_t e = 0; e < grp.size(); ++e) dot[grp[e]] += G.data[e] * Y.data[e];
    acc(tp, scores, [&](Tensor& gs) {
      for (std::size_t e = 0; e < grp.size(); ++e) gs.data[e] += Y.data[e] * (G.data[e] - dot[grp[e]]);
    });
  });
}

Var log(Var a) {
  Tensor C = a.value();
  for (auto& x : C.data) x = std::log(x);
  return a.tape->record(std::move(C), {a}, [a](Tape& tp, std::uint32_t self) {
    acc(tp, a, [&](Tensor& ga) {
      view(ga).array() += view(tp.grad_of(self)).array() / view(tp.value_of(a.id)).array();
    });
  });
}

Var exp(Var a) {
  Tensor C = a.value();
  for (auto& x : C.data) x = std::exp(x);
  return a.tape->record(std::move(C), {a}, [a](Tape& tp, std::uint32_t self) {
    acc(tp, a, [&](Tensor& ga) {
      view(ga).array() += view(tp.grad_of(self)).array() * view(tp.value_of(self)).array();
    });
  });
}

Var leaky_relu(Var a, double slope) {
  Tensor C = a.value();
  for (auto& x : C.data) x = x > 0 ? x : slope * x;
  return a.tape->record(std::move(C), {a}, [a, slope](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    const auto& X = tp.value_of(a.id);
    acc(tp, a, [&](Tensor& ga) {
      for (std::size_t k = 0; k < G.data.size(); ++k) ga.data[k] += X.data[k] > 0 ? G.data[k] : slope * G.data[k];
    });
  });
}

Var relu(Var a) { return leaky_relu(a, 0.0); }

Var elu(Var a) {
  Tensor C = a.value();
  for (auto& x : C.data) x = x > 0 ? x : std::expm1(x);
  return a.tape->record(std::move(C), {a}, [a](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    const auto& X = tp.value_of(a.id);
    const auto& Y = tp.value_of(self);
    acc(tp, a, [&](Tensor& ga) {
      for (std::size_t k = 0; k < G.data.size(); ++k) ga.data[k] += X.data[k] > 0 ? G.data[k] : G.data[k] * (Y.data[k] + 1.0);
    });
  });
}

Var layer_norm(Var a, Var gamma, Var beta, double eps) {
  const auto& A = a.value();
  require_rank2("layer_norm", A);
  const auto n = A.cols();
  if (gamma.value().cols() != n || beta.value().cols() != n || gamma.rows() != 1 || beta.rows() != 1) {
    mismatch("layer_norm", A, gamma.value());
  }
  Tensor xhat(A.rows(), n);
  std::vector<double> inv_std(A.rows());
  auto X = view(A);
  auto XH = view(xhat);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    double mu = X.row(r).mean();
    double var = (X.row(r).array() - mu).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    XH.row(r) = (X.row(r).array() - mu) * inv_std[r];
  }
  Tensor C = xhat;
  auto Y = view(C);
  Y.array().rowwise() *= view(gamma.value()).row(0).array();
  Y.rowwise() += view(beta.value()).row(0);
  return a.tape->record(
      std::move(C), {a, gamma, beta},
      [a, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp, std::uint32_t self) {
        auto G = view(tp.grad_of(self));
        auto XH = view(xhat);
        acc(tp, gamma, [&](Tensor& gg) { view(gg).row(0) += (G.array() * XH.array()).colwise().sum().matrix(); });
        acc(tp, beta, [&](Tensor& gb) { view(gb).row(0) += G.colwise().sum(); });
        acc(tp, a, [&](Tensor& ga) {
          auto gamma_row = view(tp.value_of(gamma.id)).row(0).array();
          auto GA = view(ga);
          const double n = static_cast<double>(XH.cols());
          for (Eigen::Index r = 0; r < XH.rows(); ++r) {
            Eigen::Array<double, 1, Eigen::Dynamic> dxh = G.row(r).array() * gamma_row;
            double m1 = dxh.mean();
            double m2 = (dxh * XH.row(r).array()).sum() / n;
            GA.row(r).array() += inv_std[r] * (dxh - m1 - XH.row(r).array() * m2);
          }
        });
      });
}

Var sum(Var a) {
  double s = 0;
  for (double x : a.value().data) s += x;
  return a.tape->record(Tensor::scalar(s), {a}, [a](Tape& tp, std::uint32_t self) {
    double g = tp.grad_of(self).data[0];
    acc(tp, a, [&](Tensor& ga) {
      for (auto& x : ga.data) x += g;
    });
  });
}

Var mean(Var a) {
  auto n = static_cast<double>(a.value().numel());
  if (n == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / n);
}

Var pick(Var a, std::span<const std::uint32_t> cols) {
  const auto& A = a.value();
  require_rank2("pick", A);
  if (cols.size() != A.rows()) throw ShapeError("pick: index count does not match " + A.shape_str());
  Tensor C(A.rows(), 1);
  for (std::size_t r = 0; r < cols.size(); ++r) {
    if (cols[r] >= A.cols()) throw ShapeError("pick: column index out of range for " + A.shape_str());
    C.data[r] = A.at(r, cols[r]);
  }
  std::vector<std::uint32_t> idx(cols.begin(), cols.end());
  return a.tape->record(std::move(C), {a}, [a, idx](Tape& tp, std::uint32_t self) {
    const auto& G = tp.grad_of(self);
    acc(tp, a, [&](Tensor& ga) {
      for (std::size_t r = 0; r < idx.size(); ++r) ga.at(r, idx[r]) += G.data[r];
    });
  });
}

}  // namespace dcg::ad

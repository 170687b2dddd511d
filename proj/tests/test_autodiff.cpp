// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include <filesystem>
#include <random>

#include "dcg/ad/grad_check.hpp"
#include "dcg/ad/ops.hpp"
#include "dcg/ad/params.hpp"
#include "doctest.h"

using namespace dcg::ad;

namespace {

std::mt19937_64 rng(42);

Tensor rnd(std::size_t r, std::size_t c) { return normal(r, c, 1.0, rng); }

// Reduces any output to a scalar with a fixed random projection so every
// output element receives a distinct upstream gradient.
Var project(Tape& t, Var y) {
  std::mt19937_64 local(7);
  return sum(mul(y, t.constant(normal(y.rows(), y.cols(), 1.0, local))));
}

void check_op(const char* name, const ScalarFn& f, std::vector<Tensor> inputs) {
  auto r = grad_check(f, std::move(inputs), 1e-6);
  INFO(name);
  CHECK(r.max_rel_error < 1e-5);
}

}  // namespace

TEST_CASE("forward values") {
  Tape t;
  auto a = t.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  auto b = t.constant(Tensor({2, 2}, {5, 6, 7, 8}));
  CHECK(matmul(a, b).value().data == std::vector<double>{19, 22, 43, 50});
  CHECK(matmul_nt(a, b).value().data == std::vector<double>{17, 23, 39, 53});
  CHECK(transpose(a).value().data == std::vector<double>{1, 3, 2, 4});
  auto s = softmax_rows(a).value();
  CHECK(s.at(0, 0) + s.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.at(0, 1) / s.at(0, 0) == doctest::Approx(std::exp(1.0)));
  CHECK(elu(t.constant(Tensor({1, 2}, {-1, 2}))).value().data[0] == doctest::Approx(std::exp(-1.0) - 1));
  CHECK(leaky_relu(t.constant(Tensor({1, 2}, {-1, 2}))).value().data == std::vector<double>{-0.2, 2});
  std::vector<std::uint32_t> cols = {1, 0};
  CHECK(pick(a, cols).value().data == std::vector<double>{2, 3});
  CHECK_THROWS_AS(add(a, t.constant(Tensor(3, 2))), ShapeError);
  CHECK_THROWS_AS(matmul(a, t.constant(Tensor(3, 2))), ShapeError);
}

TEST_CASE("segment softmax normalizes within groups") {
  Tape t;
  auto x = t.constant(rnd(6, 1));
  std::vector<std::uint32_t> grp = {0, 1, 0, 2, 1, 0};
  auto y = segment_softmax(x, grp, 3).value();
  double sums[3] = {0, 0, 0};
  for (std::size_t i = 0; i < 6; ++i) sums[grp[i]] += y.data[i];
  for (double s : sums) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("every primitive passes finite differences") {
  std::vector<std::uint32_t> rows = {2, 0, 2, 1};
  std::vector<std::uint32_t> grp = {0, 1, 0, 2, 1};
  std::vector<std::uint32_t> cols = {2, 0, 1};
  auto sh = [](Tensor x, double c) {
    for (auto& v : x.data) v += c;
    return x;
  };
  check_op("matmul", [](Tape& t, const std::vector<Var>& v) { return project(t, matmul(v[0], v[1])); },
           {rnd(3, 4), rnd(4, 2)});
  check_op("matmul_nt", [](Tape& t, const std::vector<Var>& v) { return project(t, matmul_nt(v[0], v[1])); },
           {rnd(3, 4), rnd(5, 4)});
  check_op("transpose", [](Tape& t, const std::vector<Var>& v) { return project(t, transpose(v[0])); },
           {rnd(3, 4)});
  check_op("add/sub/mul",
           [](Tape& t, const std::vector<Var>& v) { return project(t, mul(add(v[0], v[1]), sub(v[0], v[1]))); },
           {rnd(3, 3), rnd(3, 3)});
  check_op("add_bias", [](Tape& t, const std::vector<Var>& v) { return project(t, add_bias(v[0], v[1])); },
           {rnd(3, 4), rnd(1, 4)});
  check_op("scale/add_const",
           [](Tape& t, const std::vector<Var>& v) { return project(t, add_const(scale(v[0], -1.5), Tensor(2, 3, 0.3))); },
           {rnd(2, 3)});
  check_op("concat/slice",
           [](Tape& t, const std::vector<Var>& v) {
             std::vector<Var> cs{v[0], v[1]};
             auto c = concat_cols(cs);
             std::vector<Var> rs{slice_cols(c, 1, 4), slice_rows(v[0], 0, 1)};
             return project(t, concat_rows(std::vector<Var>{rs[0], slice_cols(rs[1], 0, 3)}));
           },
           {rnd(2, 3), rnd(2, 2)});
  check_op("gather/scatter",
           [&](Tape& t, const std::vector<Var>& v) {
             return project(t, scatter_add_rows(gather_rows(v[0], rows), rows, 4));
           },
           {rnd(3, 2)});
  check_op("scale_rows", [](Tape& t, const std::vector<Var>& v) { return project(t, scale_rows(v[0], v[1])); },
           {rnd(3, 2), rnd(3, 1)});
  check_op("softmax", [](Tape& t, const std::vector<Var>& v) { return project(t, softmax_rows(v[0])); },
           {rnd(3, 5)});
  check_op("log_softmax", [](Tape& t, const std::vector<Var>& v) { return project(t, log_softmax_rows(v[0])); },
           {rnd(3, 5)});
  check_op("segment_softmax",
           [&](Tape& t, const std::vector<Var>& v) { return project(t, segment_softmax(v[0], grp, 3)); },
           {rnd(5, 1)});
  check_op("log/exp",
           [](Tape& t, const std::vector<Var>& v) { return project(t, log(exp(v[0]))); }, {rnd(2, 3)});
  check_op("log", [](Tape& t, const std::vector<Var>& v) { return project(t, log(v[0])); },
           {sh(Tensor({2, 2}, {0.5, 1, 2, 3}), 0)});
  check_op("leaky_relu/relu/elu",
           [](Tape& t, const std::vector<Var>& v) {
             return project(t, add(add(leaky_relu(v[0]), relu(v[0])), elu(v[0])));
           },
           {rnd(4, 4)});
  check_op("layer_norm",
           [](Tape& t, const std::vector<Var>& v) { return project(t, layer_norm(v[0], v[1], v[2])); },
           {rnd(3, 6), rnd(1, 6), rnd(1, 6)});
  check_op("mean/sum", [](Tape&, const std::vector<Var>& v) { return add(mean(v[0]), scale(sum(v[0]), 2)); },
           {rnd(3, 3)});
  check_op("pick", [&](Tape& t, const std::vector<Var>& v) { return project(t, pick(log_softmax_rows(v[0]), cols)); },
           {rnd(3, 4)});
}

TEST_CASE("parameters accumulate across uses") {
  ParamStore ps;
  auto& w = ps.create("w", rnd(3, 3));
  auto f = [&](Tape& t) {
    auto x = t.param(w);
    auto y = t.param(w);  // recorded once
    return project(t, matmul(x, y));
  };
  auto r = grad_check_params(f, {&w}, 1e-6);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("no-grad tape keeps values only") {
  ParamStore ps;
  auto& w = ps.create("w", rnd(2, 2));
  Tape t(false);
  auto x = t.param(w);
  auto y = matmul(x, x);
  CHECK_FALSE(t.requires_grad(y));
  Tape g;
  auto z = matmul(g.param(w), g.param(w));
  CHECK(g.requires_grad(z));
  CHECK(y.value().data == z.value().data);
}

TEST_CASE("checkpoint round trip") {
  ParamStore ps;
  ps.create("a", rnd(2, 3));
  ps.create("b", rnd(1, 4));
  auto dir = std::filesystem::temp_directory_path() / "dcg_ckpt_test";
  std::filesystem::remove_all(dir);
  save_checkpoint(ps, dir, R"({"k":1})");
  auto copy = ps.clone();
  for (auto* p : copy.all()) std::fill(p->value.data.begin(), p->value.data.end(), 0.0);
  load_checkpoint(copy, dir);
  CHECK(copy.at("a").value.data == ps.at("a").value.data);
  CHECK(copy.at("b").value.data == ps.at("b").value.data);
  CHECK(read_checkpoint_metadata(dir).find("\"k\"") != std::string::npos);

  ParamStore wrong;
  wrong.create("a", Tensor(3, 2));
  wrong.create("b", Tensor(1, 4));
  CHECK_THROWS(load_checkpoint(wrong, dir));
}

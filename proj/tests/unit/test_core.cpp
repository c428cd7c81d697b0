// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>

#include "test_util.hpp"
#include "tgvfm/core/checkpoint.hpp"
#include "tgvfm/core/image_io.hpp"
#include "tgvfm/core/optim.hpp"
#include "tgvfm/core/params.hpp"

using namespace tgvfm;
using tgvfm::testing::probe_loss;
using tgvfm::testing::random_tensor;
using tgvfm::testing::require_gradcheck;

namespace {

Var param(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return Var::parameter(random_tensor(std::move(s), seed, lo, hi));
}

}  // namespace

TEST_CASE("elementwise ops match finite differences") {
  Var a = param({3, 4}, 1), b = param({3, 4}, 2, 0.5, 1.5);
  require_gradcheck([&] { return probe_loss(ops::add(a, b)); }, {{"a", a}, {"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::sub(a, b)); }, {{"a", a}, {"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::mul(a, b)); }, {{"a", a}, {"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::div(a, b)); }, {{"a", a}, {"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::scale(ops::add_scalar(a, 0.3), -2.0)); }, {{"a", a}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::gelu(a)); }, {{"a", a}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::sigmoid(a)); }, {{"a", a}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::tanh(a)); }, {{"a", a}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::exp(a)); }, {{"a", a}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::log(b)); }, {{"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::sqrt(b)); }, {{"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::square(a)); }, {{"a", a}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::abs(b)); }, {{"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::relu(b)); }, {{"b", b}}, 1e-6);
  require_gradcheck([&] { return ops::mean(ops::square(a)); }, {{"a", a}}, 1e-6);
}

TEST_CASE("broadcast, matmul and linear gradients") {
  Var x = param({4, 3}, 3), w = param({3, 5}, 4), b = param({5}, 5), s = param({4}, 6);
  require_gradcheck([&] { return probe_loss(ops::add_row(x, param({3}, 7))); }, {{"x", x}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::mul_channel(x, s)); }, {{"x", x}, {"s", s}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::matmul(x, w)); }, {{"x", x}, {"w", w}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::linear(x, w, b)); }, {{"x", x}, {"w", w}, {"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::transpose(x)); }, {{"x", x}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::reshape(x, {2, 6})); }, {{"x", x}}, 1e-6);
}

TEST_CASE("row normalisation gradients") {
  Var x = param({4, 6}, 8), g = param({6}, 9, 0.5, 1.5), be = param({6}, 10);
  require_gradcheck([&] { return probe_loss(ops::layer_norm(x, g, be)); }, {{"x", x}, {"g", g}, {"b", be}}, 1e-5);
  require_gradcheck([&] { return probe_loss(ops::softmax_rows(x)); }, {{"x", x}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::log_softmax_rows(x)); }, {{"x", x}}, 1e-6);
}

TEST_CASE("layer_norm rows have zero mean and unit variance") {
  Tensor x = random_tensor({3, 8}, 11, -3.0, 5.0);
  Var out = ops::layer_norm(Var(x), Var(Tensor({8}, 1.0)), Var(Tensor({8}, 0.0)), 0.0);
  for (int r = 0; r < 3; ++r) {
    double m = 0, v = 0;
    for (int c = 0; c < 8; ++c) m += out.value().at(r, c) / 8;
    for (int c = 0; c < 8; ++c) v += std::pow(out.value().at(r, c) - m, 2) / 8;
    CHECK(std::abs(m) < 1e-12);
    CHECK(std::abs(v - 1.0) < 1e-10);
  }
}

TEST_CASE("concat and slice gradients") {
  Var a = param({2, 3, 3}, 12), b = param({1, 3, 3}, 13);
  require_gradcheck([&] { return probe_loss(ops::concat0({a, b})); }, {{"a", a}, {"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::slice0(a, 1, 2)); }, {{"a", a}}, 1e-6);
  Var m = param({4, 3}, 14), n = param({4, 2}, 15);
  require_gradcheck([&] { return probe_loss(ops::concat_cols({m, n})); }, {{"m", m}, {"n", n}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::slice_cols(m, 1, 3)); }, {{"m", m}}, 1e-6);
}

TEST_CASE("conv2d matches a direct loop") {
  Tensor x = random_tensor({2, 7, 6}, 16), w = random_tensor({3, 2, 3, 3}, 17), b = random_tensor({3}, 18);
  for (int stride : {1, 2}) {
    const int pad = 1;
    Var y = ops::conv2d(Var(x), Var(w), Var(b), stride, pad);
    const int ho = (7 + 2 * pad - 3) / stride + 1, wo = (6 + 2 * pad - 3) / stride + 1;
    REQUIRE(y.shape() == Shape{3, ho, wo});
    double err = 0;
    for (int o = 0; o < 3; ++o)
      for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
          double acc = b[o];
          for (int c = 0; c < 2; ++c)
            for (int u = 0; u < 3; ++u)
              for (int v = 0; v < 3; ++v) {
                int yy = i * stride - pad + u, xx = j * stride - pad + v;
                if (yy < 0 || yy >= 7 || xx < 0 || xx >= 6) continue;
                acc += w[((o * 2 + c) * 3 + u) * 3 + v] * x.at(c, yy, xx);
              }
          err = std::max(err, std::abs(acc - y.value().at(o, i, j)));
        }
    CHECK(err < 1e-12);
  }
}

TEST_CASE("spatial op gradients") {
  Var x = param({2, 6, 6}, 19), w = param({3, 2, 3, 3}, 20), b = param({3}, 21);
  require_gradcheck([&] { return probe_loss(ops::conv2d(x, w, b, 1, 1)); }, {{"x", x}, {"w", w}, {"b", b}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::conv2d(x, w, b, 2, 1)); }, {{"x", x}, {"w", w}, {"b", b}}, 1e-6);
  Var w2 = param({2, 2, 2, 2}, 22);
  require_gradcheck([&] { return probe_loss(ops::conv2d(x, w2, Var(), 2, 0)); }, {{"x", x}, {"w", w2}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::upsample_nearest(x, 2)); }, {{"x", x}}, 1e-6);
  require_gradcheck([&] { return probe_loss(ops::upsample_bilinear(x, 13, 9)); }, {{"x", x}}, 1e-6);
}

TEST_CASE("bilinear upsampling of a constant map is constant") {
  Var up = ops::upsample_bilinear(Var(Tensor({1, 3, 4}, 0.7)), 12, 16);
  for (double v : up.value().vec()) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("attend honours the mask and matches a hand softmax") {
  // Query row 0 sees keys {0, 2}; row 1 sees key 1 only.
  Tensor q({2, 2}, std::vector<double>{1, 0, 0, 1});
  Tensor k({3, 2}, std::vector<double>{1, 0, 0, 1, 2, 0});
  Tensor v({3, 1}, std::vector<double>{10, 20, 30});
  ops::AttendIndex idx{2, 2, {0, 2, 1, -1}};
  Tensor weights;
  Var out = ops::attend(Var(q), Var(k), Var(v), idx, 1.0, &weights);
  const double e1 = std::exp(1.0), e2 = std::exp(2.0);
  CHECK(out.value()[0] == doctest::Approx((10 * e1 + 30 * e2) / (e1 + e2)).epsilon(1e-12));
  CHECK(out.value()[1] == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(weights.at(1, 1) == 0.0);
  CHECK(weights.at(0, 0) + weights.at(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("attend gradients") {
  Var q = param({4, 3}, 23), k = param({6, 3}, 24), v = param({6, 2}, 25);
  ops::AttendIndex idx{4, 3, {0, 1, 2, 3, -1, 5, 4, 4, 0, -1, 2, 1}};
  require_gradcheck([&] { return probe_loss(ops::attend(q, k, v, idx, 0.5)); }, {{"q", q}, {"k", k}, {"v", v}}, 1e-6);
  auto dense = ops::AttendIndex::dense(4, 6);
  require_gradcheck([&] { return probe_loss(ops::attend(q, k, v, dense, 0.5)); }, {{"q", q}, {"k", k}, {"v", v}},
                    1e-6);
}

TEST_CASE("attend rejects a fully masked row") {
  ops::AttendIndex idx{1, 2, {-1, -1}};
  CHECK_THROWS_AS(ops::attend(Var(Tensor({1, 2})), Var(Tensor({2, 2})), Var(Tensor({2, 2})), idx, 1.0),
                  ContractError);
}

TEST_CASE("shared nodes accumulate gradient from every use") {
  Var a = Var::parameter(Tensor({2}, std::vector<double>{1.0, 2.0}));
  Var b = a;
  backward(ops::sum(ops::add(ops::mul(a, b), a)));
  CHECK(a.grad()[0] == doctest::Approx(3.0));
  CHECK(a.grad()[1] == doctest::Approx(5.0));
}

TEST_CASE("no-grad mode records nothing") {
  Var a = Var::parameter(Tensor({2}, 1.0));
  NoGradGuard guard;
  Var y = ops::exp(a);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("parameter init is keyed by seed and name") {
  auto r1 = rng_for(7, "enc.0.w"), r2 = rng_for(7, "enc.0.w"), r3 = rng_for(7, "enc.1.w");
  CHECK(r1() == r2());
  CHECK(r1() != r3());
  ParamStore ps;
  Var w = ps.add("w", Tensor({2, 2}, 1.0));
  ps.alias("w_shared", w);
  CHECK(ps.entries().size() == 2);
  CHECK(ps.unique().size() == 1);
  CHECK(ps.scalar_count() == 4);
}

TEST_CASE("adam minimises a quadratic") {
  ParamStore ps;
  Var x = ps.add("x", Tensor({3}, std::vector<double>{2.0, -1.0, 0.5}));
  Adam opt(ps, {.lr = 0.05});
  for (int i = 0; i < 500; ++i) {
    opt.zero_grad();
    backward(ops::sum(ops::square(x)));
    opt.step();
  }
  CHECK(x.value().max_abs() < 1e-2);
  CHECK(opt.steps() == 500);
}

TEST_CASE("tensor archive round trip and magic check") {
  const auto path = (std::filesystem::temp_directory_path() / "tgvfm_archive_test.bin").string();
  TensorArchive a;
  a.magic = "TST1";
  a.config_text = "x = 1\n";
  a.dtype = TensorDType::F64;
  a.tensors.emplace_back("w", random_tensor({2, 3}, 30));
  write_archive(path, a);
  TensorArchive b = read_archive(path, "TST1");
  CHECK(b.config_text == a.config_text);
  CHECK(max_abs_diff(b.find("w"), a.find("w")) == 0.0);
  CHECK_THROWS_AS(read_archive(path, "XXX1"), IoError);

  a.dtype = TensorDType::F32;
  write_archive(path, a);
  b = read_archive(path, "TST1");
  CHECK(max_abs_diff(b.find("w"), a.find("w")) < 1e-6);
  std::filesystem::remove(path);
}

TEST_CASE("png round trip at 8 and 16 bits") {
  const auto path = (std::filesystem::temp_directory_path() / "tgvfm_png_test.png").string();
  for (int depth : {8, 16}) {
    Raster r{5, 3, 1, depth, {}};
    for (int i = 0; i < 15; ++i) r.samples.push_back(static_cast<std::uint16_t>(depth == 8 ? i * 17 : i * 4000));
    write_png(path, r);
    Raster s = read_png(path);
    CHECK(s.width == 5);
    CHECK(s.height == 3);
    CHECK(s.bit_depth == depth);
    CHECK(s.samples == r.samples);
  }
  std::filesystem::remove(path);
}

TEST_CASE("gather gradient with repeated indices") {
  Var x = param({3, 4}, 31);
  require_gradcheck([&] { return probe_loss(ops::gather(x, {0, 5, 5, 11, 2})); }, {{"x", x}}, 1e-6);
  CHECK_THROWS_AS(ops::gather(x, {12}), ContractError);
}

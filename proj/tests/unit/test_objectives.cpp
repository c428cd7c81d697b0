// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "test_util.hpp"
#include "tgvfm/objectives/detection.hpp"
#include "tgvfm/objectives/losses.hpp"
#include "tgvfm/objectives/metrics.hpp"

using namespace tgvfm;
using namespace tgvfm::objectives;
using tgvfm::testing::random_tensor;

TEST_CASE("cross-entropy examples") {
  CHECK(ce_loss(Var(Tensor({1, 3}, std::vector<double>{0, 1, 0})), {1}).value().item() == 0.0);
  CHECK(ce_loss(Var(Tensor({1, 4}, 0.25)), {2}).value().item() == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  Tensor p({3, 2}, std::vector<double>{0.9, 0.1, 0.3, 0.7, 0.5, 0.5});
  const double batch = ce_loss(Var(p), {0, 1, 0}).value().item();
  CHECK(batch == doctest::Approx((-std::log(0.9) - std::log(0.7) - std::log(0.5)) / 3).epsilon(1e-14));
  CHECK(ce_loss(Var(p), {0, -1, -1}).value().item() == doctest::Approx(-std::log(0.9)).epsilon(1e-14));
  CHECK_THROWS_AS(ce_loss(Var(p), {-1, -1, -1}), ContractError);
  CHECK_THROWS_AS(ce_loss(Var(p), {0, 2, 0}), ContractError);
}

TEST_CASE("cross-entropy decreases as mass moves toward the true class") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p{u(rng), u(rng), u(rng)};
    const double s = p[0] + p[1] + p[2];
    for (auto& v : p) v /= s;
    const int y = trial % 3;
    std::vector<double> q = p;
    const int donor = (y + 1) % 3;
    const double moved = 0.5 * q[donor];
    q[donor] -= moved;
    q[y] += moved;
    CHECK(ce_loss(Var(Tensor({1, 3}, q)), {y}).value().item() < ce_loss(Var(Tensor({1, 3}, p)), {y}).value().item());
  }
}

TEST_CASE("logit cross-entropy agrees with the probability form") {
  Tensor logits = random_tensor({5, 4}, 4, -2, 2);
  std::vector<int> labels{0, 3, 1, 2, 2};
  Var a = ce_loss_logits(Var(logits), labels);
  Var b = ce_loss(ops::softmax_rows(Var(logits)), labels);
  CHECK(a.value().item() == doctest::Approx(b.value().item()).epsilon(1e-13));
}

TEST_CASE("silog closed forms") {
  Tensor gt = random_tensor({4, 5}, 5, 1.0, 30.0);
  for (double c : {0.5, 2.0, 3.7}) {
    Tensor pred = gt;
    for (auto& v : pred.vec()) v *= c;
    CHECK(std::abs(silog_loss(Var(pred), gt).value().item() - std::abs(std::log(c)) / std::sqrt(2.0)) < 1e-9);
    CHECK(std::abs(silog_loss(Var(pred), gt, {}, {1.0}).value().item()) < 1e-9);
  }
  CHECK(silog_loss(Var(gt), gt).value().item() == 0.0);
}

TEST_CASE("silog masking and errors") {
  Tensor gt({2, 2}, std::vector<double>{1, 0, 2, 4});
  Tensor pred({2, 2}, std::vector<double>{2, 5, 4, 8});
  // Invalid pixel (gt 0) is skipped; the rest are a uniform factor 2.
  CHECK(silog_loss(Var(pred), gt).value().item() == doctest::Approx(std::log(2.0) / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(silog_loss(Var(pred), gt, {false, false, false, false}), ContractError);
  Tensor bad = pred;
  bad[0] = 0.0;
  CHECK_THROWS_AS(silog_loss(Var(bad), gt), ContractError);
  CHECK_THROWS_AS(silog_loss(Var(pred), gt, {}, {1.5}), ConfigError);
}

TEST_CASE("silog gradient and joint scale invariance") {
  Var pred = Var::parameter(random_tensor({8}, 6, 0.5, 10.0));
  Tensor gt = random_tensor({8}, 7, 0.5, 10.0);
  tgvfm::testing::require_gradcheck([&] { return silog_loss(pred, gt); }, {{"pred", pred}}, 1e-5,
                                    {.eps = 1e-6, .five_point = true});
  Tensor p2 = pred.value(), g2 = gt;
  for (auto& v : p2.vec()) v *= 7.5;
  for (auto& v : g2.vec()) v *= 7.5;
  CHECK(silog_loss(Var(p2), g2).value().item() ==
        doctest::Approx(silog_loss(Var(pred.value()), gt).value().item()).epsilon(1e-12));
}

TEST_CASE("detection stage losses") {
  Tensor boxes({2, 4}, std::vector<double>{0, 0, 4, 4, 1, 1, 3, 3});
  DetectionLossConfig one{1, 0.4};
  DetStagePrediction perfect{Var(Tensor({2}, std::vector<double>{1.0, 0.0})), Var(boxes)};
  auto l = det_stage_losses({perfect}, {1, 0}, boxes, one);
  CHECK(l.total.value().item() == 0.0);

  Tensor off = boxes;
  off.at(0, 0) += 1.0;
  DetStagePrediction shifted{Var(Tensor({2}, std::vector<double>{1.0, 0.0})), Var(off)};
  CHECK(det_stage_losses({shifted}, {1, 0}, boxes, one).box[0].value().item() == doctest::Approx(1.0));

  DetStagePrediction soft{Var(Tensor({2}, std::vector<double>{0.7, 0.2})), Var(off)};
  const double single = det_stage_losses({soft}, {1, 0}, boxes, one).total.value().item();
  CHECK(single == doctest::Approx(-std::log(0.7) - std::log(0.8) + 1.0).epsilon(1e-14));
  const double triple = det_stage_losses({soft, soft, soft}, {1, 0}, boxes, {3, 0.4}).total.value().item();
  CHECK(triple == doctest::Approx(3.0 * single).epsilon(1e-14));

  auto empty = det_stage_losses({soft}, {}, Tensor(), one);
  CHECK(empty.total.value().item() == 0.0);
  CHECK_THROWS_AS(det_stage_losses({soft, soft}, {1, 0}, boxes, one), ConfigError);
}

TEST_CASE("detection loss gradient") {
  Var p = Var::parameter(random_tensor({3}, 8, 0.1, 0.9));
  Var b = Var::parameter(random_tensor({3, 4}, 9, 0.0, 8.0));
  Tensor gt = random_tensor({3, 4}, 10, 0.0, 8.0);
  tgvfm::testing::require_gradcheck(
      [&] { return det_stage_losses({{p, b}, {p, b}}, {1, 0, 1}, gt, {2, 0.4}).total; }, {{"p", p}, {"b", b}}, 1e-6);
}

TEST_CASE("pseudo-box filtering is strictly above the threshold") {
  std::vector<ScoredBox> in{{{0, 0, 1, 1}, 0.39}, {{0, 0, 2, 2}, 0.40}, {{0, 0, 3, 3}, 0.41}};
  auto kept = filter_pseudo_boxes(in, {});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0][2] == 3.0);
  CHECK(filter_pseudo_boxes({}, {}).empty());
  CHECK(filter_pseudo_boxes(in, {3, 0.0}).size() == 3);
}

TEST_CASE("distillation L1") {
  Tensor a({1, 2}, std::vector<double>{1, 0}), b({1, 2}, std::vector<double>{0, 1});
  CHECK(distill_seg_l1(Var(a), a).value().item() == 0.0);
  CHECK(distill_seg_l1(Var(a), b).value().item() == 1.0);
  Tensor x = random_tensor({6, 4}, 11, 0, 1), y = random_tensor({6, 4}, 12, 0, 1);
  CHECK(distill_seg_l1(Var(x), y).value().item() == distill_seg_l1(Var(y), x).value().item());
  CHECK_THROWS_AS(distill_seg_l1(Var(x), Tensor({4, 6})), ContractError);
}

TEST_CASE("miou examples") {
  auto r = miou({0, 0, 1, 1}, {0, 1, 1, 1}, 2);
  CHECK(r.per_class[0] == doctest::Approx(0.5));
  CHECK(r.per_class[1] == doctest::Approx(2.0 / 3.0));
  CHECK(r.mean == doctest::Approx(7.0 / 12.0));
  auto same = miou({0, 2, 1, 2}, {0, 2, 1, 2}, 4);
  CHECK(same.mean == 1.0);
  CHECK(std::isnan(same.per_class[3]));
  CHECK_THROWS_AS(miou({0}, {255}, 2, 255), ContractError);
  CHECK_THROWS_AS(miou({0}, {5}, 2), RangeError);
}

TEST_CASE("miou matches pairwise brute-force counting on random maps") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 4;
    std::uniform_int_distribution<int> lab(0, k - 1);
    std::vector<int> pred(64), gt(64);
    for (int i = 0; i < 64; ++i) pred[i] = lab(rng), gt[i] = lab(rng);
    auto r = miou(pred, gt, k);
    double sum = 0;
    int present = 0;
    for (int c = 0; c < k; ++c) {
      int inter = 0, uni = 0;
      for (int i = 0; i < 64; ++i) {
        inter += pred[i] == c && gt[i] == c;
        uni += pred[i] == c || gt[i] == c;
      }
      if (uni == 0) {
        CHECK(std::isnan(r.per_class[c]));
        continue;
      }
      CHECK(r.per_class[c] == static_cast<double>(inter) / uni);
      sum += static_cast<double>(inter) / uni;
      ++present;
    }
    CHECK(r.mean == sum / present);
  }
}

TEST_CASE("global confusion pooling differs from per-image averaging") {
  ConfusionMatrix cm(2);
  cm.add({0, 0}, {0, 1});
  cm.add({1, 1, 1, 1}, {1, 1, 1, 1});
  // Pooled: class 0 IoU 1/2, class 1 IoU 4/5.
  CHECK(miou(cm).mean == doctest::Approx(0.65));
}

TEST_CASE("depth metric examples") {
  Tensor gt({2, 3}, std::vector<double>{1, 2, 3, 4, 8, 16});
  auto same = depth_metrics(gt, gt);
  CHECK(same.delta1 == 1.0);
  CHECK(same.rel == 0.0);
  CHECK(same.rms == 0.0);
  CHECK(same.rms_log == 0.0);
  Tensor scaled = gt;
  for (auto& v : scaled.vec()) v *= 1.25;
  auto m = depth_metrics(scaled, gt);
  CHECK(m.delta1 == 0.0);
  CHECK(m.delta2 == 1.0);
  CHECK(m.delta3 == 1.0);
  CHECK(m.rel == doctest::Approx(0.25).epsilon(1e-14));
  Tensor sparse = gt;
  sparse[1] = 0.0;
  CHECK(depth_metrics(gt, sparse).count == 5);
  CHECK_THROWS_AS(depth_metrics(gt, Tensor({2, 3}, 0.0)), ContractError);
}

TEST_CASE("depth metrics are order invariant and threshold-monotone") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor gt = random_tensor({32}, 100 + trial, 0.5, 20.0), pred = random_tensor({32}, 200 + trial, 0.5, 20.0);
    auto a = depth_metrics(pred, gt);
    CHECK(a.delta1 <= a.delta2);
    CHECK(a.delta2 <= a.delta3);
    std::vector<int> perm(32);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor pg(Shape{32}), pp(Shape{32});
    for (int i = 0; i < 32; ++i) pg[i] = gt[perm[i]], pp[i] = pred[perm[i]];
    auto b = depth_metrics(pp, pg);
    CHECK(b.delta1 == a.delta1);
    CHECK(b.rel == doctest::Approx(a.rel).epsilon(1e-14));
    CHECK(b.rms == doctest::Approx(a.rms).epsilon(1e-14));
  }
}

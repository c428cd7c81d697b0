// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/objectives/losses.hpp"

#include <cmath>
#include <string>

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"

namespace tgvfm::objectives {

namespace {

std::vector<std::size_t> true_class_index(const Var& x, const std::vector<int>& labels, int ignore_index) {
  if (x.shape().size() != 2) throw ContractError("class scores must be [N, K], got " + shape_str(x.shape()));
  const int n = x.dim(0), k = x.dim(1);
  if (static_cast<int>(labels.size()) != n) throw ContractError("label count does not match score rows");
  std::vector<std::size_t> idx;
  for (int i = 0; i < n; ++i) {
    if (labels[i] == ignore_index) continue;
    if (labels[i] < 0 || labels[i] >= k) throw ContractError("label " + std::to_string(labels[i]) + " out of range");
    idx.push_back(static_cast<std::size_t>(i) * k + labels[i]);
  }
  if (idx.empty()) throw ContractError("cross-entropy over an empty pixel set");
  return idx;
}

}  // namespace

Var ce_loss(const Var& probs, const std::vector<int>& labels, int ignore_index) {
  const auto idx = true_class_index(probs, labels, ignore_index);
  return ops::scale(ops::mean(ops::log(ops::gather(probs, idx))), -1.0);
}

Var ce_loss_logits(const Var& logits, const std::vector<int>& labels, int ignore_index) {
  const auto idx = true_class_index(logits, labels, ignore_index);
  return ops::scale(ops::mean(ops::gather(ops::log_softmax_rows(logits), idx)), -1.0);
}

Var silog_loss(const Var& pred, const Tensor& gt, const std::vector<bool>& valid, SiLogConfig config) {
  if (config.lambda < 0.0 || config.lambda > 1.0) throw ConfigError("SiLog lambda must lie in [0, 1]");
  if (pred.shape() != gt.shape()) throw ContractError("silog: pred/gt shape mismatch");
  if (!valid.empty() && valid.size() != gt.numel()) throw ContractError("silog: mask size mismatch");
  std::vector<std::size_t> idx;
  std::vector<double> lg;
  for (std::size_t i = 0; i < gt.numel(); ++i) {
    const bool ok = valid.empty() ? gt[i] > 0.0 : valid[i];
    if (!ok) continue;
    if (!(pred.value()[i] > 0.0)) throw ContractError("silog: non-positive predicted depth");
    if (!(gt[i] > 0.0)) throw ContractError("silog: non-positive ground truth on a valid pixel");
    idx.push_back(i);
    lg.push_back(std::log(gt[i]));
  }
  if (idx.empty()) throw ContractError("silog: no valid pixels");
  const int n = static_cast<int>(idx.size());
  const Var g = ops::sub(ops::log(ops::gather(pred, idx)), Var(Tensor(Shape{n}, std::move(lg))));
  // mean g^2 - lambda mean(g)^2 written as var(g) + (1 - lambda) mean(g)^2, which stays >= 0 in floating point.
  const Var mg = ops::mean(g);
  const Var dev = ops::sub(g, ops::concat0(std::vector<Var>(n, mg)));
  const Var v = ops::add(ops::mean(ops::square(dev)), ops::scale(ops::square(mg), 1.0 - config.lambda));
  return ops::sqrt(v);
}

Var distill_seg_l1(const Var& student_probs, const Tensor& teacher_probs) {
  if (student_probs.shape() != teacher_probs.shape()) {
    throw ContractError("distill_seg_l1: shape mismatch " + shape_str(student_probs.shape()) + " vs " +
                        shape_str(teacher_probs.shape()));
  }
  return ops::mean(ops::abs(ops::sub(student_probs, Var(teacher_probs))));
}

}  // namespace tgvfm::objectives

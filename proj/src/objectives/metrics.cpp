// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/objectives/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tgvfm/core/errors.hpp"

namespace tgvfm::objectives {

ConfusionMatrix::ConfusionMatrix(int n_classes, int ignore_index)
    : n_(n_classes), ignore_(ignore_index), counts_(static_cast<std::size_t>(n_classes) * n_classes, 0) {
  if (n_classes < 1) throw ConfigError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(const std::vector<int>& pred, const std::vector<int>& gt) {
  if (pred.size() != gt.size()) throw ContractError("prediction and label maps differ in size");
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == ignore_) continue;
    if (gt[i] < 0 || gt[i] >= n_ || pred[i] < 0 || pred[i] >= n_) {
      throw RangeError("label out of range at pixel " + std::to_string(i));
    }
    ++counts_[static_cast<std::size_t>(gt[i]) * n_ + pred[i]];
  }
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

MIoU miou(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ContractError("miou: no valid pixels");
  const int n = cm.n_classes();
  MIoU r;
  r.per_class.assign(n, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < n; ++c) {
    std::uint64_t tp = cm.at(c, c), fp = 0, fn = 0;
    for (int o = 0; o < n; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    const std::uint64_t denom = tp + fp + fn;
    if (denom == 0) continue;
    r.per_class[c] = static_cast<double>(tp) / static_cast<double>(denom);
    sum += r.per_class[c];
    ++present;
  }
  r.mean = sum / present;
  return r;
}

MIoU miou(const std::vector<int>& pred, const std::vector<int>& gt, int n_classes, int ignore_index) {
  ConfusionMatrix cm(n_classes, ignore_index);
  cm.add(pred, gt);
  return miou(cm);
}

void DepthAccumulator::add(const Tensor& pred, const Tensor& gt, const std::vector<bool>& valid) {
  if (pred.shape() != gt.shape()) throw ContractError("depth metrics: shape mismatch");
  if (!valid.empty() && valid.size() != gt.numel()) throw ContractError("depth metrics: mask size mismatch");
  for (std::size_t i = 0; i < gt.numel(); ++i) {
    if (!(valid.empty() ? gt[i] > 0.0 : valid[i])) continue;
    const double d = pred[i], g = gt[i];
    if (!(d > 0.0) || !(g > 0.0)) throw ContractError("depth metrics: non-positive depth on a valid pixel");
    const double ratio = std::max(d / g, g / d);
    d1_ += ratio < 1.25;
    d2_ += ratio < 1.25 * 1.25;
    d3_ += ratio < 1.25 * 1.25 * 1.25;
    rel_ += std::abs(d - g) / g;
    sq_ += (d - g) * (d - g);
    const double lg = std::log(d) - std::log(g);
    sq_log_ += lg * lg;
    ++n_;
  }
}

DepthMetrics DepthAccumulator::result() const {
  if (n_ == 0) throw ContractError("depth metrics: no valid pixels");
  const double n = static_cast<double>(n_);
  return {d1_ / n, d2_ / n, d3_ / n, rel_ / n, std::sqrt(sq_ / n), std::sqrt(sq_log_ / n), n_};
}

DepthMetrics depth_metrics(const Tensor& pred, const Tensor& gt, const std::vector<bool>& valid) {
  DepthAccumulator acc;
  acc.add(pred, gt, valid);
  return acc.result();
}

}  // namespace tgvfm::objectives

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "tgvfm/core/tensor.hpp"

namespace tgvfm::objectives {

/// Global confusion matrix accumulated over an evaluation split.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int n_classes, int ignore_index = -1);

  /// Throws RangeError for labels outside [0, n_classes) that are not ignored.
  void add(const std::vector<int>& pred, const std::vector<int>& gt);

  int n_classes() const { return n_; }
  std::uint64_t at(int gt, int pred) const { return counts_[static_cast<std::size_t>(gt) * n_ + pred]; }
  std::uint64_t total() const;

 private:
  int n_;
  int ignore_;
  std::vector<std::uint64_t> counts_;
};

struct MIoU {
  std::vector<double> per_class;  ///< NaN for classes absent from both pred and gt
  double mean = 0.0;              ///< over classes present in gt or pred
};

/// Throws ContractError when no pixel was counted.
MIoU miou(const ConfusionMatrix& cm);
MIoU miou(const std::vector<int>& pred, const std::vector<int>& gt, int n_classes, int ignore_index = -1);

struct DepthMetrics {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double rel = 0.0;
  double rms = 0.0;
  double rms_log = 0.0;
  std::size_t count = 0;
};

/// Running sums so metrics can be pooled over a split.
class DepthAccumulator {
 public:
  /// An empty mask means "gt > 0". Non-positive predictions on valid pixels throw ContractError.
  void add(const Tensor& pred, const Tensor& gt, const std::vector<bool>& valid = {});
  /// Throws ContractError when nothing was accumulated.
  DepthMetrics result() const;

 private:
  double d1_ = 0, d2_ = 0, d3_ = 0, rel_ = 0, sq_ = 0, sq_log_ = 0;
  std::size_t n_ = 0;
};

DepthMetrics depth_metrics(const Tensor& pred, const Tensor& gt, const std::vector<bool>& valid = {});

}  // namespace tgvfm::objectives

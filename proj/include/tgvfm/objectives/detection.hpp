// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "tgvfm/core/autograd.hpp"

namespace tgvfm::objectives {

using Box = std::array<double, 4>;

struct ScoredBox {
  Box box;
  double score = 0.0;
};

struct DetectionLossConfig {
  int n_stages = 3;
  double confidence_threshold = 0.4;
};

/// One cascade stage: foreground probabilities [M] and regressed boxes [M, 4].
struct DetStagePrediction {
  Var probs;
  Var boxes;
};

struct DetLosses {
  std::vector<Var> cls;  ///< per stage: binary cross-entropy summed over proposals
  std::vector<Var> box;  ///< per stage: L1 summed over positive proposals
  Var total;             ///< sum over stages of cls + box
};

/// gt_labels are 0/1 per proposal; gt_boxes [M, 4]. No proposals gives zero
/// losses. Throws ConfigError when the stage count differs from the config.
DetLosses det_stage_losses(const std::vector<DetStagePrediction>& stages, const std::vector<int>& gt_labels,
                           const Tensor& gt_boxes, const DetectionLossConfig& config);

/// Keeps boxes whose score is strictly above the threshold.
std::vector<Box> filter_pseudo_boxes(const std::vector<ScoredBox>& boxes, const DetectionLossConfig& config);

}  // namespace tgvfm::objectives

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tgvfm/core/autograd.hpp"

namespace tgvfm::objectives {

inline constexpr int kNoIgnore = -1;

/// probs [N, K] rows summing to 1; labels per row. -(1/N) sum log p_true over
/// rows whose label differs from ignore_index. Throws ContractError when every
/// row is ignored or a label is out of range.
Var ce_loss(const Var& probs, const std::vector<int>& labels, int ignore_index = kNoIgnore);

/// Same loss from unnormalised logits [N, K] through log-softmax.
Var ce_loss_logits(const Var& logits, const std::vector<int>& labels, int ignore_index = kNoIgnore);

struct SiLogConfig {
  double lambda = 0.5;
};

/// sqrt(mean g^2 - lambda mean(g)^2), g = log pred - log gt over valid pixels.
/// An empty valid mask means "gt > 0". Throws ContractError for an empty valid
/// set or a non-positive prediction, ConfigError for lambda outside [0, 1].
Var silog_loss(const Var& pred, const Tensor& gt, const std::vector<bool>& valid = {}, SiLogConfig config = {});

/// Mean |student - teacher| over every entry. Throws ContractError on shape mismatch.
Var distill_seg_l1(const Var& student_probs, const Tensor& teacher_probs);

}  // namespace tgvfm::objectives

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tgvfm/core/autograd.hpp"

namespace tgvfm::e2vid {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean SSIM over valid window positions, Gaussian window (11, sigma 1.5),
/// C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = 1. Images smaller than the
/// window use the largest odd window that fits, renormalised.
/// Accepts [H, W] or [1, H, W]. Throws ContractError on shape mismatch.
double ssim(const Tensor& a, const Tensor& b);

/// Differentiable form of ssim().
Var ssim_var(const Var& a, const Var& b);

/// mean |a - b| + 0.5 * (1 - ssim(a, b)).
Var reconstruction_loss(const Var& pred, const Var& target);

}  // namespace tgvfm::e2vid

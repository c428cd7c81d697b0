// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tgvfm/core/autograd.hpp"

namespace tgvfm {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Entries sampled per tensor; 0 checks every entry.
  int samples_per_tensor = 0;
  /// Denominator floor for the relative error.
  double floor = 1e-6;
  std::uint64_t seed = 0;
  /// Fourth-order five-point stencil instead of the two-point central difference.
  bool five_point = false;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

/// Compares tape gradients with central finite differences of `loss_fn`.
/// rel = |analytic - numeric| / max(|analytic|, |numeric|, floor).
std::vector<GradCheckEntry> gradcheck(const std::function<Var()>& loss_fn,
                                      const std::vector<std::pair<std::string, Var>>& params,
                                      const GradCheckOptions& opts = {});

}  // namespace tgvfm

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tgvfm/core/params.hpp"

namespace tgvfm {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Adaptive moment estimation over the distinct nodes of a ParamStore.
/// Frozen parameters are simply left out of the store passed in.
class Adam {
 public:
  Adam(const ParamStore& params, AdamOptions opts);

  void step();
  void zero_grad();

  long long steps() const { return t_; }
  const AdamOptions& options() const { return opts_; }
  void set_lr(double lr) { opts_.lr = lr; }

  /// Moment buffers keyed by the representative parameter name.
  struct Slot {
    std::string name;
    Var param;
    Tensor m;
    Tensor v;
  };
  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }
  void set_steps(long long t) { t_ = t; }

 private:
  AdamOptions opts_;
  std::vector<Slot> slots_;
  long long t_ = 0;
};

}  // namespace tgvfm

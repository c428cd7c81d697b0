// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/core/optim.hpp"

#include <cmath>

namespace tgvfm {

Adam::Adam(const ParamStore& params, AdamOptions opts) : opts_(opts) {
  for (const auto& [name, v] : params.unique()) {
    slots_.push_back({name, v, Tensor::zeros(v.shape()), Tensor::zeros(v.shape())});
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (auto& s : slots_) {
    Node* node = s.param.node();
    if (node->grad.empty()) continue;
    Tensor& p = node->value;
    const Tensor& g = node->grad;
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double gi = g[i] + opts_.weight_decay * p[i];
      s.m[i] = opts_.beta1 * s.m[i] + (1.0 - opts_.beta1) * gi;
      s.v[i] = opts_.beta2 * s.v[i] + (1.0 - opts_.beta2) * gi * gi;
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      p[i] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& s : slots_) s.param.zero_grad();
}

}  // namespace tgvfm

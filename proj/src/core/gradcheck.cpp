// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tgvfm {

std::vector<GradCheckEntry> gradcheck(const std::function<Var()>& loss_fn,
                                      const std::vector<std::pair<std::string, Var>>& params,
                                      const GradCheckOptions& opts) {
  for (const auto& [n, v] : params) {
    Var copy = v;
    copy.zero_grad();
  }
  backward(loss_fn());
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& [n, v] : params) analytic.push_back(v.grad());

  std::mt19937_64 rng(opts.seed);
  std::vector<GradCheckEntry> out;
  NoGradGuard no_grad;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Var v = params[p].second;
    Tensor& value = v.mutable_value();
    std::vector<std::size_t> idx(value.numel());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (opts.samples_per_tensor > 0 && idx.size() > static_cast<std::size_t>(opts.samples_per_tensor)) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(opts.samples_per_tensor));
    }
    GradCheckEntry e;
    e.name = params[p].first;
    for (std::size_t i : idx) {
      const double orig = value[i];
      auto at = [&](double offset) {
        value[i] = orig + offset;
        return loss_fn().value().item();
      };
      const double h = opts.eps;
      const double numeric = opts.five_point
                                 ? (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h)
                                 : (at(h) - at(-h)) / (2.0 * h);
      value[i] = orig;
      const double a = analytic[p][i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.floor});
      e.max_abs_err = std::max(e.max_abs_err, abs_err);
      e.max_rel_err = std::max(e.max_rel_err, abs_err / denom);
      ++e.checked;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace tgvfm

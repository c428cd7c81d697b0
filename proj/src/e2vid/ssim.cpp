// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/e2vid/ssim.hpp"

#include <algorithm>
#include <cmath>

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"

namespace tgvfm::e2vid {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

Tensor gaussian_window(int size) {
  std::vector<double> g(size);
  const double c = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) total += g[i] = std::exp(-(i - c) * (i - c) / (2.0 * kSsimSigma * kSsimSigma));
  Tensor w(Shape{1, 1, size, size});
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) w[i * size + j] = g[i] * g[j] / (total * total);
  return w;
}

Var as_image(const Var& x) {
  if (x.shape().size() == 2) return ops::reshape(x, {1, x.dim(0), x.dim(1)});
  if (x.shape().size() == 3 && x.dim(0) == 1) return x;
  throw ContractError("ssim expects [H, W] or [1, H, W], got " + shape_str(x.shape()));
}

}  // namespace

Var ssim_var(const Var& a_in, const Var& b_in) {
  const Var a = as_image(a_in), b = as_image(b_in);
  if (a.shape() != b.shape()) {
    throw ContractError("ssim shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  int size = std::min({kSsimWindow, a.dim(1), a.dim(2)});
  if (size % 2 == 0) --size;
  const Var w(gaussian_window(size));
  auto blur = [&](const Var& x) { return ops::conv2d(x, w, Var(), 1, 0); };
  const Var mu_a = blur(a), mu_b = blur(b);
  const Var mu_aa = ops::square(mu_a), mu_bb = ops::square(mu_b), mu_ab = ops::mul(mu_a, mu_b);
  const Var var_a = ops::sub(blur(ops::square(a)), mu_aa);
  const Var var_b = ops::sub(blur(ops::square(b)), mu_bb);
  const Var cov = ops::sub(blur(ops::mul(a, b)), mu_ab);
  const Var num = ops::mul(ops::add_scalar(ops::scale(mu_ab, 2.0), kC1), ops::add_scalar(ops::scale(cov, 2.0), kC2));
  const Var den = ops::mul(ops::add_scalar(ops::add(mu_aa, mu_bb), kC1), ops::add_scalar(ops::add(var_a, var_b), kC2));
  return ops::mean(ops::div(num, den));
}

double ssim(const Tensor& a, const Tensor& b) {
  NoGradGuard no_grad;
  return ssim_var(Var(a), Var(b)).value().item();
}

Var reconstruction_loss(const Var& pred, const Var& target) {
  const Var l1 = ops::mean(ops::abs(ops::sub(as_image(pred), as_image(target))));
  return ops::add(l1, ops::scale(ops::add_scalar(ops::scale(ssim_var(pred, target), -1.0), 1.0), 0.5));
}

}  // namespace tgvfm::e2vid

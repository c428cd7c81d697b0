// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tgvfm/core/autograd.hpp"

// Differentiable primitives. Layout conventions: token maps are [N, C] with
// row-major tokens; image-like maps are [C, H, W].
namespace tgvfm::ops {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
/// x [N, C] + b [C] broadcast over rows.
Var add_row(const Var& x, const Var& b);
/// x [C, ...] * s [C] broadcast over everything past the first axis.
Var mul_channel(const Var& x, const Var& s);

Var matmul(const Var& a, const Var& b);
/// x [N, in] * w [in, out] (+ b [out]).
Var linear(const Var& x, const Var& w, const Var& b = Var());

Var relu(const Var& x);
Var gelu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var square(const Var& x);
Var sqrt(const Var& x);
Var abs(const Var& x);

Var sum(const Var& x);
Var mean(const Var& x);

/// Normalises each row of x [N, C] and applies gamma/beta [C].
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
Var softmax_rows(const Var& x);
Var log_softmax_rows(const Var& x);

/// Concatenation / slicing along the leading axis (channels for [C,H,W], tokens for [N,C]).
Var concat0(const std::vector<Var>& parts);
Var slice0(const Var& x, int begin, int end);
/// Column concatenation / slicing for [N, C] matrices.
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& x, int begin, int end);

Var reshape(const Var& x, Shape shape);
/// Flat-index gather: out[i] = x[index[i]], shape [index.size()].
Var gather(const Var& x, const std::vector<std::size_t>& index);
Var transpose(const Var& x);

/// x [Ci, H, W], w [Co, Ci, kh, kw], b [Co] or undefined.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var upsample_nearest(const Var& x, int factor);
/// Bilinear resize of [C, h, w] to [C, H, W] with half-pixel centres.
Var upsample_bilinear(const Var& x, int out_h, int out_w);

/// Sparse gather-attention: row n of q attends over the key/value rows
/// listed in `index` (width `width`, -1 = masked out). Masked entries never
/// enter the softmax.
struct AttendIndex {
  int rows = 0;
  int width = 0;
  std::vector<int> index;

  int at(int row, int j) const { return index[static_cast<std::size_t>(row) * width + j]; }
  /// Every query row sees all `keys` rows.
  static AttendIndex dense(int rows, int keys);
};

/// q [N, d], k [M, d], v [M, dv] -> [N, dv]. When `weights` is non-null it
/// receives the [N, width] softmax weights (0 at masked slots).
Var attend(const Var& q, const Var& k, const Var& v, const AttendIndex& index, double scale,
           Tensor* weights = nullptr);

}  // namespace tgvfm::ops

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tgvfm/core/autograd.hpp"

namespace tgvfm::tcfb {

/// Token grid of a [N, C] map, N = height * width, row-major.
struct Grid {
  int height = 0;
  int width = 0;

  int tokens() const { return height * width; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Single-head projections: wq, wk, wv [C, d]; wo [d, C]. No biases.
struct AttentionParams {
  Var wq;
  Var wk;
  Var wv;
  Var wo;

  int dim() const { return wq.dim(1); }
};

/// Long-range temporal attention. For every token the sequence is
/// [f_t, hist[0], ..., hist[m-1]] at the same location (hist most recent
/// first, m may be 0); the current-frame query row is read out and added to
/// f_t. `weights`, when given, receives [N, m+1] softmax weights.
Var lta_forward(const Var& f_t, const std::vector<Var>& hist, const AttentionParams& p, Tensor* weights = nullptr);

/// Inter-frame cross attention: Q from f_prev, K and V from f_t over all
/// tokens, result added to f_t. An undefined f_prev returns f_t unchanged.
Var cross_attention_forward(const Var& f_t, const Var& f_prev, const AttentionParams& p, Tensor* weights = nullptr);

/// Local window attention: token (h, w) attends over itself in f_t plus the
/// (2 delta + 1)^2 neighbourhood of (h, w) in f_prev; out-of-bounds
/// neighbours are masked. An undefined f_prev returns f_t unchanged.
/// `weights` receives [N, 1 + (2 delta + 1)^2] with 0 at masked slots.
/// Throws ConfigError for delta < 0.
Var window_attention_forward(const Var& f_t, const Var& f_prev, Grid grid, int delta, const AttentionParams& p,
                             Tensor* weights = nullptr);

/// Number of keys token (h, w) sees in window attention.
int window_key_count(Grid grid, int delta, int h, int w);

/// [C, H, W] feature map to [H*W, C] tokens and back.
Var map_to_tokens(const Var& map);
Var tokens_to_map(const Var& tokens, Grid grid);

}  // namespace tgvfm::tcfb

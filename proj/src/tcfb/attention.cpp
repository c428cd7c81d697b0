// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/tcfb/attention.hpp"

#include <cmath>

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"

namespace tgvfm::tcfb {

namespace {

void require_tokens(const Var& x, const Var& like, const char* what) {
  if (x.shape() != like.shape()) {
    throw ContractError(std::string(what) + ": shape " + shape_str(x.shape()) + " does not match " +
                        shape_str(like.shape()));
  }
}

double scale_of(const AttentionParams& p) { return 1.0 / std::sqrt(static_cast<double>(p.dim())); }

}  // namespace

Var lta_forward(const Var& f_t, const std::vector<Var>& hist, const AttentionParams& p, Tensor* weights) {
  const int n = f_t.dim(0);
  const int len = static_cast<int>(hist.size()) + 1;
  std::vector<Var> seq{f_t};
  for (const auto& h : hist) {
    require_tokens(h, f_t, "lta history");
    seq.push_back(h);
  }
  const Var stacked = len == 1 ? f_t : ops::concat0(seq);
  ops::AttendIndex idx{n, len, std::vector<int>(static_cast<std::size_t>(n) * len)};
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < len; ++j) idx.index[static_cast<std::size_t>(r) * len + j] = j * n + r;
  const Var q = ops::matmul(f_t, p.wq);
  const Var k = ops::matmul(stacked, p.wk);
  const Var v = ops::matmul(stacked, p.wv);
  const Var attn = ops::attend(q, k, v, idx, scale_of(p), weights);
  return ops::add(f_t, ops::matmul(attn, p.wo));
}

Var cross_attention_forward(const Var& f_t, const Var& f_prev, const AttentionParams& p, Tensor* weights) {
  if (!f_prev.defined()) return f_t;
  require_tokens(f_prev, f_t, "cross attention");
  const int n = f_t.dim(0);
  const Var q = ops::matmul(f_prev, p.wq);
  const Var k = ops::matmul(f_t, p.wk);
  const Var v = ops::matmul(f_t, p.wv);
  const Var attn = ops::attend(q, k, v, ops::AttendIndex::dense(n, n), scale_of(p), weights);
  return ops::add(f_t, ops::matmul(attn, p.wo));
}

int window_key_count(Grid grid, int delta, int h, int w) {
  const int rows = std::min(grid.height - 1, h + delta) - std::max(0, h - delta) + 1;
  const int cols = std::min(grid.width - 1, w + delta) - std::max(0, w - delta) + 1;
  return 1 + rows * cols;
}

Var window_attention_forward(const Var& f_t, const Var& f_prev, Grid grid, int delta, const AttentionParams& p,
                             Tensor* weights) {
  if (delta < 0) throw ConfigError("window radius delta must be >= 0");
  if (!f_prev.defined()) return f_t;
  require_tokens(f_prev, f_t, "window attention");
  const int n = f_t.dim(0);
  if (grid.tokens() != n) throw ContractError("window attention: grid does not match token count");
  const int side = 2 * delta + 1;
  const int width = 1 + side * side;
  ops::AttendIndex idx{n, width, std::vector<int>(static_cast<std::size_t>(n) * width, -1)};
  for (int h = 0; h < grid.height; ++h) {
    for (int w = 0; w < grid.width; ++w) {
      const int r = h * grid.width + w;
      int* row = idx.index.data() + static_cast<std::size_t>(r) * width;
      row[0] = r;
      for (int dh = -delta; dh <= delta; ++dh) {
        for (int dw = -delta; dw <= delta; ++dw) {
          const int hh = h + dh, ww = w + dw;
          const int slot = 1 + (dh + delta) * side + (dw + delta);
          if (hh >= 0 && hh < grid.height && ww >= 0 && ww < grid.width) row[slot] = n + hh * grid.width + ww;
        }
      }
    }
  }
  const Var stacked = ops::concat0({f_t, f_prev});
  const Var q = ops::matmul(f_t, p.wq);
  const Var k = ops::matmul(stacked, p.wk);
  const Var v = ops::matmul(stacked, p.wv);
  const Var attn = ops::attend(q, k, v, idx, scale_of(p), weights);
  return ops::add(f_t, ops::matmul(attn, p.wo));
}

Var map_to_tokens(const Var& map) {
  if (map.shape().size() != 3) throw ContractError("map_to_tokens expects [C, H, W]");
  return ops::transpose(ops::reshape(map, {map.dim(0), map.dim(1) * map.dim(2)}));
}

Var tokens_to_map(const Var& tokens, Grid grid) {
  if (tokens.dim(0) != grid.tokens()) throw ContractError("tokens_to_map: grid does not match token count");
  return ops::reshape(ops::transpose(tokens), {tokens.dim(1), grid.height, grid.width});
}

}  // namespace tgvfm::tcfb

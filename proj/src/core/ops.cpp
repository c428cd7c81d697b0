// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/core/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tgvfm::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

CMapMat as_mat(const Tensor& t, int rows, int cols) { return CMapMat(t.data(), rows, cols); }
MapMat as_mat(Tensor& t, int rows, int cols) { return MapMat(t.data(), rows, cols); }

bool wants(const Node& self, std::size_t i) {
  return self.parents[i] && self.parents[i]->requires_grad;
}
Tensor& grad_of(Node& self, std::size_t i) { return self.parents[i]->grad_buffer(); }

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ContractError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
  }
}

void require_rank(const Var& x, std::size_t rank, const char* op) {
  if (x.value().rank() != rank) {
    throw ContractError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                        shape_str(x.shape()));
  }
}

// Elementwise unary op from value->output and (input, output)->derivative.
template <class F, class D>
Var unary(const Var& x, F f, D df) {
  Tensor out(x.shape());
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = f(xv[i]);
  return make_result(std::move(out), {x}, [df](Node& self) {
    const Tensor& xv = self.parents[0]->value;
    Tensor& gx = grad_of(self, 0);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[i] * df(xv[i], self.value[i]);
  });
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (!wants(self, p)) continue;
      Tensor& g = grad_of(self, p);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) {
      Tensor& g = grad_of(self, 0);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
    if (wants(self, 1)) {
      Tensor& g = grad_of(self, 1);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = self.parents[0]->value;
    const Tensor& bv = self.parents[1]->value;
    if (wants(self, 0)) {
      Tensor& g = grad_of(self, 0);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants(self, 1)) {
      Tensor& g = grad_of(self, 1);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Var div(const Var& a, const Var& b) {
  require_same(a, b, "div");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] /= b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    const Tensor& bv = self.parents[1]->value;
    if (wants(self, 0)) {
      Tensor& g = grad_of(self, 0);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] / bv[i];
    }
    if (wants(self, 1)) {
      Tensor& g = grad_of(self, 1);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i] * self.value[i] / bv[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (auto& v : out.vec()) v *= s;
  return make_result(std::move(out), {a}, [s](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += s * self.grad[i];
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor out = a.value();
  for (auto& v : out.vec()) v += s;
  return make_result(std::move(out), {a}, [](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
  });
}

Var add_row(const Var& x, const Var& b) {
  require_rank(x, 2, "add_row");
  const int n = x.dim(0), c = x.dim(1);
  if (b.numel() != static_cast<std::size_t>(c)) throw ContractError("add_row: bias width mismatch");
  Tensor out = x.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) out.at(i, j) += b.value()[j];
  return make_result(std::move(out), {x, b}, [n, c](Node& self) {
    if (wants(self, 0)) {
      Tensor& g = grad_of(self, 0);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
    if (wants(self, 1)) {
      Tensor& g = grad_of(self, 1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) g[j] += self.grad.at(i, j);
    }
  });
}

Var mul_channel(const Var& x, const Var& s) {
  const int c = x.dim(0);
  if (s.numel() != static_cast<std::size_t>(c)) throw ContractError("mul_channel: scale width mismatch");
  const std::size_t inner = x.numel() / static_cast<std::size_t>(c);
  Tensor out = x.value();
  for (int ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < inner; ++i) out[ch * inner + i] *= s.value()[ch];
  return make_result(std::move(out), {x, s}, [c, inner](Node& self) {
    const Tensor& xv = self.parents[0]->value;
    const Tensor& sv = self.parents[1]->value;
    if (wants(self, 0)) {
      Tensor& g = grad_of(self, 0);
      for (int ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < inner; ++i) g[ch * inner + i] += self.grad[ch * inner + i] * sv[ch];
    }
    if (wants(self, 1)) {
      Tensor& g = grad_of(self, 1);
      for (int ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < inner; ++i) g[ch] += self.grad[ch * inner + i] * xv[ch * inner + i];
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const int n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) {
    throw ContractError("matmul: inner dimension mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  Tensor out(Shape{n, m});
  as_mat(out, n, m).noalias() = as_mat(a.value(), n, k) * as_mat(b.value(), k, m);
  return make_result(std::move(out), {a, b}, [n, k, m](Node& self) {
    auto g = as_mat(self.grad, n, m);
    if (wants(self, 0)) {
      as_mat(grad_of(self, 0), n, k).noalias() += g * as_mat(self.parents[1]->value, k, m).transpose();
    }
    if (wants(self, 1)) {
      as_mat(grad_of(self, 1), k, m).noalias() += as_mat(self.parents[0]->value, n, k).transpose() * g;
    }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  Var y = matmul(x, w);
  return b.defined() ? add_row(y, b) : y;
}

Var relu(const Var& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var gelu(const Var& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  return unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [](double v, double) { return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(-0.5 * v * v); });
}

Var sigmoid(const Var& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(const Var& x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var log(const Var& x) {
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var square(const Var& x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var sqrt(const Var& x) {
  return unary(x, [](double v) { return std::sqrt(v); }, [](double, double y) { return 0.5 / y; });
}

Var abs(const Var& x) {
  return unary(x, [](double v) { return std::abs(v); },
               [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var sum(const Var& x) {
  return make_result(Tensor::scalar(x.value().sum()), {x}, [](Node& self) {
    Tensor& g = grad_of(self, 0);
    const double s = self.grad[0];
    for (auto& v : g.vec()) v += s;
  });
}

Var mean(const Var& x) {
  const double n = static_cast<double>(x.numel());
  return make_result(Tensor::scalar(x.value().sum() / n), {x}, [n](Node& self) {
    Tensor& g = grad_of(self, 0);
    const double s = self.grad[0] / n;
    for (auto& v : g.vec()) v += s;
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_rank(x, 2, "layer_norm");
  const int n = x.dim(0), c = x.dim(1);
  if (gamma.numel() != static_cast<std::size_t>(c) || beta.numel() != static_cast<std::size_t>(c)) {
    throw ContractError("layer_norm: affine width mismatch");
  }
  Tensor out(Shape{n, c});
  Tensor xhat(Shape{n, c});
  std::vector<double> inv_std(n);
  const Tensor& xv = x.value();
  for (int i = 0; i < n; ++i) {
    double mu = 0.0;
    for (int j = 0; j < c; ++j) mu += xv.at(i, j);
    mu /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) var += (xv.at(i, j) - mu) * (xv.at(i, j) - mu);
    var /= c;
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < c; ++j) {
      xhat.at(i, j) = (xv.at(i, j) - mu) * inv_std[i];
      out.at(i, j) = xhat.at(i, j) * gamma.value()[j] + beta.value()[j];
    }
  }
  return make_result(std::move(out), {x, gamma, beta},
                     [n, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                       const Tensor& gv = self.parents[1]->value;
                       if (wants(self, 1) || wants(self, 2)) {
                         for (int i = 0; i < n; ++i) {
                           for (int j = 0; j < c; ++j) {
                             if (wants(self, 1)) grad_of(self, 1)[j] += self.grad.at(i, j) * xhat.at(i, j);
                             if (wants(self, 2)) grad_of(self, 2)[j] += self.grad.at(i, j);
                           }
                         }
                       }
                       if (!wants(self, 0)) return;
                       Tensor& gx = grad_of(self, 0);
                       std::vector<double> dxhat(c);
                       for (int i = 0; i < n; ++i) {
                         double m1 = 0.0, m2 = 0.0;
                         for (int j = 0; j < c; ++j) {
                           dxhat[j] = self.grad.at(i, j) * gv[j];
                           m1 += dxhat[j];
                           m2 += dxhat[j] * xhat.at(i, j);
                         }
                         m1 /= c;
                         m2 /= c;
                         for (int j = 0; j < c; ++j) gx.at(i, j) += inv_std[i] * (dxhat[j] - m1 - xhat.at(i, j) * m2);
                       }
                     });
}

Var softmax_rows(const Var& x) {
  require_rank(x, 2, "softmax_rows");
  const int n = x.dim(0), c = x.dim(1);
  Tensor out(Shape{n, c});
  for (int i = 0; i < n; ++i) {
    double mx = x.value().at(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, x.value().at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) z += (out.at(i, j) = std::exp(x.value().at(i, j) - mx));
    for (int j = 0; j < c; ++j) out.at(i, j) /= z;
  }
  return make_result(std::move(out), {x}, [n, c](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += self.grad.at(i, j) * self.value.at(i, j);
      for (int j = 0; j < c; ++j) g.at(i, j) += self.value.at(i, j) * (self.grad.at(i, j) - dot);
    }
  });
}

Var log_softmax_rows(const Var& x) {
  require_rank(x, 2, "log_softmax_rows");
  const int n = x.dim(0), c = x.dim(1);
  Tensor out(Shape{n, c});
  for (int i = 0; i < n; ++i) {
    double mx = x.value().at(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, x.value().at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) z += std::exp(x.value().at(i, j) - mx);
    const double lz = mx + std::log(z);
    for (int j = 0; j < c; ++j) out.at(i, j) = x.value().at(i, j) - lz;
  }
  return make_result(std::move(out), {x}, [n, c](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < c; ++j) s += self.grad.at(i, j);
      for (int j = 0; j < c; ++j) g.at(i, j) += self.grad.at(i, j) - std::exp(self.value.at(i, j)) * s;
    }
  });
}

Var concat0(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat0: no inputs");
  Shape shape = parts[0].shape();
  int lead = 0;
  for (const auto& p : parts) {
    Shape rest(p.shape().begin() + 1, p.shape().end());
    if (rest != Shape(shape.begin() + 1, shape.end())) throw ContractError("concat0: trailing shape mismatch");
    lead += p.dim(0);
  }
  shape[0] = lead;
  Tensor out(shape);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    std::copy(p.value().vec().begin(), p.value().vec().end(), out.vec().begin() + static_cast<std::ptrdiff_t>(off));
    off += p.numel();
  }
  return make_result(std::move(out), parts, [offsets](Node& self) {
    for (std::size_t p = 0; p < offsets.size(); ++p) {
      if (!wants(self, p)) continue;
      Tensor& g = grad_of(self, p);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[offsets[p] + i];
    }
  });
}

Var slice0(const Var& x, int begin, int end) {
  if (begin < 0 || end > x.dim(0) || begin >= end) throw ContractError("slice0: bad range");
  Shape shape = x.shape();
  const std::size_t inner = x.numel() / static_cast<std::size_t>(shape[0]);
  shape[0] = end - begin;
  const std::size_t off = static_cast<std::size_t>(begin) * inner;
  Tensor out(shape);
  std::copy_n(x.value().data() + off, out.numel(), out.data());
  return make_result(std::move(out), {x}, [off](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (std::size_t i = 0; i < self.grad.numel(); ++i) g[off + i] += self.grad[i];
  });
}

Var gather(const Var& x, const std::vector<std::size_t>& index) {
  Tensor out(Shape{static_cast<int>(index.size())});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= x.numel()) throw ContractError("gather: index out of range");
    out[i] = x.value()[index[i]];
  }
  return make_result(std::move(out), {x}, [index](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (std::size_t i = 0; i < index.size(); ++i) g[index[i]] += self.grad[i];
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const int n = parts[0].dim(0);
  std::vector<int> widths;
  int total = 0;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != n) throw ContractError("concat_cols: row mismatch");
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  Tensor out(Shape{n, total});
  int col = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p.dim(1); ++j) out.at(i, col + j) = p.value().at(i, j);
    col += p.dim(1);
  }
  return make_result(std::move(out), parts, [n, widths](Node& self) {
    int col = 0;
    for (std::size_t p = 0; p < widths.size(); ++p) {
      if (wants(self, p)) {
        Tensor& g = grad_of(self, p);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < widths[p]; ++j) g.at(i, j) += self.grad.at(i, col + j);
      }
      col += widths[p];
    }
  });
}

Var slice_cols(const Var& x, int begin, int end) {
  require_rank(x, 2, "slice_cols");
  if (begin < 0 || end > x.dim(1) || begin >= end) throw ContractError("slice_cols: bad range");
  const int n = x.dim(0), w = end - begin;
  Tensor out(Shape{n, w});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < w; ++j) out.at(i, j) = x.value().at(i, begin + j);
  return make_result(std::move(out), {x}, [n, w, begin](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < w; ++j) g.at(i, begin + j) += self.grad.at(i, j);
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), {x}, [](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
  });
}

Var transpose(const Var& x) {
  require_rank(x, 2, "transpose");
  const int r = x.dim(0), c = x.dim(1);
  Tensor out(Shape{c, r});
  as_mat(out, c, r) = as_mat(x.value(), r, c).transpose();
  return make_result(std::move(out), {x}, [r, c](Node& self) {
    as_mat(grad_of(self, 0), r, c) += as_mat(self.grad, c, r).transpose();
  });
}

namespace {

struct ConvGeom {
  int ci, h, w, co, kh, kw, stride, pad, ho, wo;
  int k() const { return ci * kh * kw; }
  int p() const { return ho * wo; }
};

void im2col(const double* x, const ConvGeom& g, double* cols) {
  for (int c = 0; c < g.ci; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        double* row = cols + static_cast<std::size_t>((c * g.kh + ky) * g.kw + kx) * g.p();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          double* dst = row + oy * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill_n(dst, g.wo, 0.0);
            continue;
          }
          const double* src = x + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, const ConvGeom& g, double* x) {
  for (int c = 0; c < g.ci; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const double* row = cols + static_cast<std::size_t>((c * g.kh + ky) * g.kw + kx) * g.p();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          double* dst = x + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
          const double* src = row + oy * g.wo;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  require_rank(x, 3, "conv2d");
  if (w.value().rank() != 4) throw ContractError("conv2d: weight must be [Co, Ci, kh, kw]");
  ConvGeom g{};
  g.ci = x.dim(0);
  g.h = x.dim(1);
  g.w = x.dim(2);
  g.co = w.dim(0);
  g.kh = w.dim(2);
  g.kw = w.dim(3);
  g.stride = stride;
  g.pad = pad;
  if (w.dim(1) != g.ci) {
    throw ContractError("conv2d: input has " + std::to_string(g.ci) + " channels, weight expects " +
                        std::to_string(w.dim(1)));
  }
  g.ho = (g.h + 2 * pad - g.kh) / stride + 1;
  g.wo = (g.w + 2 * pad - g.kw) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0) throw ContractError("conv2d: kernel larger than padded input");
  if (b.defined() && b.numel() != static_cast<std::size_t>(g.co)) throw ContractError("conv2d: bias width mismatch");

  std::vector<double> cols(static_cast<std::size_t>(g.k()) * g.p());
  im2col(x.value().data(), g, cols.data());
  Tensor out(Shape{g.co, g.ho, g.wo});
  auto om = as_mat(out, g.co, g.p());
  om.noalias() = as_mat(w.value(), g.co, g.k()) * CMapMat(cols.data(), g.k(), g.p());
  if (b.defined()) {
    for (int c = 0; c < g.co; ++c) om.row(c).array() += b.value()[c];
  }
  // The column buffer is rebuilt in backward rather than kept alive on the tape.
  return make_result(std::move(out), {x, w, b}, [g](Node& self) {
    auto gm = as_mat(self.grad, g.co, g.p());
    if (wants(self, 2)) {
      Tensor& gb = grad_of(self, 2);
      for (int c = 0; c < g.co; ++c) gb[c] += gm.row(c).sum();
    }
    if (wants(self, 1)) {
      std::vector<double> cols(static_cast<std::size_t>(g.k()) * g.p());
      im2col(self.parents[0]->value.data(), g, cols.data());
      as_mat(grad_of(self, 1), g.co, g.k()).noalias() += gm * CMapMat(cols.data(), g.k(), g.p()).transpose();
    }
    if (wants(self, 0)) {
      RowMat dcols = as_mat(self.parents[1]->value, g.co, g.k()).transpose() * gm;
      col2im(dcols.data(), g, grad_of(self, 0).data());
    }
  });
}

Var upsample_nearest(const Var& x, int factor) {
  require_rank(x, 3, "upsample_nearest");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = h * factor, ow = w * factor;
  Tensor out(Shape{c, oh, ow});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < oh; ++y)
      for (int xx = 0; xx < ow; ++xx) out.at(ch, y, xx) = x.value().at(ch, y / factor, xx / factor);
  return make_result(std::move(out), {x}, [c, oh, ow, factor](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx) g.at(ch, y / factor, xx / factor) += self.grad.at(ch, y, xx);
  });
}

namespace {
struct Lerp {
  int i0, i1;
  double w1;
};
std::vector<Lerp> lerp_table(int in, int out) {
  std::vector<Lerp> t(out);
  const double ratio = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * ratio - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, in - 1);
    t[o] = {i0, i1, src - i0};
  }
  return t;
}
}  // namespace

Var upsample_bilinear(const Var& x, int out_h, int out_w) {
  require_rank(x, 3, "upsample_bilinear");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  auto ty = lerp_table(h, out_h);
  auto tx = lerp_table(w, out_w);
  Tensor out(Shape{c, out_h, out_w});
  const Tensor& xv = x.value();
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < out_h; ++y) {
      const auto& ly = ty[y];
      for (int xx = 0; xx < out_w; ++xx) {
        const auto& lx = tx[xx];
        const double top = (1 - lx.w1) * xv.at(ch, ly.i0, lx.i0) + lx.w1 * xv.at(ch, ly.i0, lx.i1);
        const double bot = (1 - lx.w1) * xv.at(ch, ly.i1, lx.i0) + lx.w1 * xv.at(ch, ly.i1, lx.i1);
        out.at(ch, y, xx) = (1 - ly.w1) * top + ly.w1 * bot;
      }
    }
  }
  return make_result(std::move(out), {x}, [c, out_h, out_w, ty, tx](Node& self) {
    Tensor& g = grad_of(self, 0);
    for (int ch = 0; ch < c; ++ch) {
      for (int y = 0; y < out_h; ++y) {
        const auto& ly = ty[y];
        for (int xx = 0; xx < out_w; ++xx) {
          const auto& lx = tx[xx];
          const double d = self.grad.at(ch, y, xx);
          g.at(ch, ly.i0, lx.i0) += d * (1 - ly.w1) * (1 - lx.w1);
          g.at(ch, ly.i0, lx.i1) += d * (1 - ly.w1) * lx.w1;
          g.at(ch, ly.i1, lx.i0) += d * ly.w1 * (1 - lx.w1);
          g.at(ch, ly.i1, lx.i1) += d * ly.w1 * lx.w1;
        }
      }
    }
  });
}

AttendIndex AttendIndex::dense(int rows, int keys) {
  AttendIndex idx;
  idx.rows = rows;
  idx.width = keys;
  idx.index.resize(static_cast<std::size_t>(rows) * keys);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < keys; ++j) idx.index[static_cast<std::size_t>(i) * keys + j] = j;
  return idx;
}

Var attend(const Var& q, const Var& k, const Var& v, const AttendIndex& index, double scale, Tensor* weights) {
  require_rank(q, 2, "attend");
  require_rank(k, 2, "attend");
  require_rank(v, 2, "attend");
  const int n = q.dim(0), d = q.dim(1), m = k.dim(0), dv = v.dim(1);
  if (k.dim(1) != d || v.dim(0) != m) throw ContractError("attend: q/k/v shape mismatch");
  if (index.rows != n || index.index.size() != static_cast<std::size_t>(n) * index.width) {
    throw ContractError("attend: index table does not match query rows");
  }
  const int width = index.width;
  Tensor attn(Shape{n, width});
  Tensor out(Shape{n, dv});
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  for (int i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < width; ++j) {
      const int r = index.at(i, j);
      if (r < 0) continue;
      if (r >= m) throw ContractError("attend: key index out of range");
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += qv.at(i, c) * kv.at(r, c);
      attn.at(i, j) = s * scale;
      mx = std::max(mx, attn.at(i, j));
      any = true;
    }
    if (!any) throw ContractError("attend: query row " + std::to_string(i) + " has no visible keys");
    double z = 0.0;
    for (int j = 0; j < width; ++j) {
      if (index.at(i, j) < 0) {
        attn.at(i, j) = 0.0;
        continue;
      }
      attn.at(i, j) = std::exp(attn.at(i, j) - mx);
      z += attn.at(i, j);
    }
    for (int j = 0; j < width; ++j) {
      attn.at(i, j) /= z;
      const int r = index.at(i, j);
      if (r < 0) continue;
      const double a = attn.at(i, j);
      for (int c = 0; c < dv; ++c) out.at(i, c) += a * vv.at(r, c);
    }
  }
  if (weights) *weights = attn;
  return make_result(std::move(out), {q, k, v}, [n, d, dv, width, index, scale, attn = std::move(attn)](Node& self) {
    const Tensor& qv = self.parents[0]->value;
    const Tensor& kv = self.parents[1]->value;
    const Tensor& vv = self.parents[2]->value;
    const bool gq = wants(self, 0), gk = wants(self, 1), gvw = wants(self, 2);
    Tensor* dq = gq ? &grad_of(self, 0) : nullptr;
    Tensor* dk = gk ? &grad_of(self, 1) : nullptr;
    Tensor* dvv = gvw ? &grad_of(self, 2) : nullptr;
    std::vector<double> da(width);
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < width; ++j) {
        const int r = index.at(i, j);
        da[j] = 0.0;
        if (r < 0) continue;
        const double a = attn.at(i, j);
        double s = 0.0;
        for (int c = 0; c < dv; ++c) {
          s += self.grad.at(i, c) * vv.at(r, c);
          if (dvv) dvv->at(r, c) += a * self.grad.at(i, c);
        }
        da[j] = s;
        dot += a * s;
      }
      if (!dq && !dk) continue;
      for (int j = 0; j < width; ++j) {
        const int r = index.at(i, j);
        if (r < 0) continue;
        const double ds = attn.at(i, j) * (da[j] - dot) * scale;
        for (int c = 0; c < d; ++c) {
          if (dq) dq->at(i, c) += ds * kv.at(r, c);
          if (dk) dk->at(r, c) += ds * qv.at(i, c);
        }
      }
    }
  });
}

}  // namespace tgvfm::ops

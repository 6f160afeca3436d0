// Copyright 2026 The vfpt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfpt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace vfpt {

namespace kernels {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: inner extents disagree: " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  Tensor c({n, m});
  const double* A = a.ptr();
  const double* B = b.ptr();
  double* C = c.ptr();
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = C + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = B + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

namespace {

struct AxisSplit {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " invalid for " + shape_str(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis);
  Tensor y(x.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.len * s.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < s.len; ++k) mx = std::max(mx, x[base + k * s.inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < s.len; ++k) {
        const double e = std::exp(x[base + k * s.inner] - mx);
        y[base + k * s.inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < s.len; ++k) y[base + k * s.inner] /= total;
    }
  }
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() != 2) throw DimensionError("layer_norm expects [n, d], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), d = x.dim(1);
  require_shape(gamma, {d}, "layer_norm gamma");
  require_shape(beta, {d}, "layer_norm beta");
  Tensor y({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += x.at(i, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (x.at(i, j) - mean) * (x.at(i, j) - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) y.at(i, j) = gamma[j] * (x.at(i, j) - mean) * rstd + beta[j];
  }
  return y;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace kernels

namespace ops {

namespace {

void same_tape(Var a, Var b, const char* what) {
  if (&a.tape() != &b.tape()) throw ProtocolError(std::string(what) + ": operands on different tapes");
}

}  // namespace

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor y = a.value();
  y += b.value();
  const bool rg = a.requires_grad() || b.requires_grad();
  return a.tape().record(std::move(y), rg, [a, b](const Tensor& g) {
    a.tape().accumulate(a, g);
    b.tape().accumulate(b, g);
  });
}

Var scale(Var a, double s) {
  Tensor y = a.value();
  for (double& v : y.data()) v *= s;
  return a.tape().record(std::move(y), a.requires_grad(), [a, s](const Tensor& g) {
    Tensor& da = a.tape().grad_slot(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += s * g[i];
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return x.tape().record(Tensor::scalar(total), x.requires_grad(), [x](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    for (double& v : dx.data()) v += g[0];
  });
}

Var linear(Var x, Var w, Var b) {
  same_tape(x, w, "linear");
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  if (X.rank() != 2 || W.rank() != 2 || X.dim(1) != W.dim(0)) {
    throw DimensionError("linear: cannot apply weight " + shape_str(W.shape()) + " to input " +
                         shape_str(X.shape()));
  }
  const std::size_t n = X.dim(0), din = X.dim(1), dout = W.dim(1);
  Tensor y = kernels::matmul(X, W);
  if (b.valid()) {
    require_shape(b.value(), {dout}, "linear bias");
    const Tensor& B = b.value();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dout; ++j) y.at(i, j) += B[j];
  }
  const bool rg = x.requires_grad() || w.requires_grad() || (b.valid() && b.requires_grad());
  return x.tape().record(std::move(y), rg, [x, w, b, n, din, dout](const Tensor& g) {
    Tape& t = x.tape();
    if (x.requires_grad()) {
      Tensor& dx = t.grad_slot(x);
      const double* W = w.value().ptr();
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g.ptr() + i * dout;
        for (std::size_t k = 0; k < din; ++k) {
          const double* wrow = W + k * dout;
          double s = 0.0;
          for (std::size_t j = 0; j < dout; ++j) s += grow[j] * wrow[j];
          dx[i * din + k] += s;
        }
      }
    }
    if (w.requires_grad()) {
      Tensor& dw = t.grad_slot(w);
      const double* X = x.value().ptr();
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g.ptr() + i * dout;
        for (std::size_t k = 0; k < din; ++k) {
          const double xv = X[i * din + k];
          double* dwrow = dw.ptr() + k * dout;
          for (std::size_t j = 0; j < dout; ++j) dwrow[j] += xv * grow[j];
        }
      }
    }
    if (b.valid() && b.requires_grad()) {
      Tensor& db = t.grad_slot(b);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dout; ++j) db[j] += g[i * dout + j];
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Tensor& X = x.value();
  if (X.rank() != 2) throw DimensionError("layer_norm expects [n, d], got " + shape_str(X.shape()));
  const std::size_t n = X.dim(0), d = X.dim(1);
  require_shape(gamma.value(), {d}, "layer_norm gamma");
  require_shape(beta.value(), {d}, "layer_norm beta");
  Tensor xhat({n, d});
  std::vector<double> rstd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += X.at(i, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (X.at(i, j) - mean) * (X.at(i, j) - mean);
    var /= static_cast<double>(d);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) xhat.at(i, j) = (X.at(i, j) - mean) * rstd[i];
  }
  Tensor y({n, d});
  const Tensor& G = gamma.value();
  const Tensor& B = beta.value();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) y.at(i, j) = G[j] * xhat.at(i, j) + B[j];
  const bool rg = x.requires_grad() || gamma.requires_grad() || beta.requires_grad();
  return x.tape().record(
      std::move(y), rg, [x, gamma, beta, n, d, xhat = std::move(xhat), rstd = std::move(rstd)](const Tensor& g) {
        Tape& t = x.tape();
        if (gamma.requires_grad()) {
          Tensor& dg = t.grad_slot(gamma);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) dg[j] += g[i * d + j] * xhat.at(i, j);
        }
        if (beta.requires_grad()) {
          Tensor& db = t.grad_slot(beta);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) db[j] += g[i * d + j];
        }
        if (x.requires_grad()) {
          Tensor& dx = t.grad_slot(x);
          const Tensor& G = gamma.value();
          std::vector<double> dxhat(d);
          for (std::size_t i = 0; i < n; ++i) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              dxhat[j] = g[i * d + j] * G[j];
              mean_d += dxhat[j];
              mean_dx += dxhat[j] * xhat.at(i, j);
            }
            mean_d /= static_cast<double>(d);
            mean_dx /= static_cast<double>(d);
            for (std::size_t j = 0; j < d; ++j) {
              dx[i * d + j] += rstd[i] * (dxhat[j] - mean_d - xhat.at(i, j) * mean_dx);
            }
          }
        }
      });
}

Var gelu(Var x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = kernels::gelu(x.value()[i]);
  return x.tape().record(std::move(y), x.requires_grad(), [x](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    const Tensor& X = x.value();
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * kernels::gelu_grad(X[i]);
  });
}

Var sigmoid(Var x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = kernels::sigmoid(x.value()[i]);
  Tensor saved = y;
  return x.tape().record(std::move(y), x.requires_grad(), [x, saved = std::move(saved)](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * saved[i] * (1.0 - saved[i]);
  });
}

Var softmax(Var x, std::size_t axis) {
  Tensor y = kernels::softmax(x.value(), axis);
  const Shape& shape = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  Tensor saved = y;
  return x.tape().record(std::move(y), x.requires_grad(),
                         [x, outer, inner, len, saved = std::move(saved)](const Tensor& g) {
                           Tensor& dx = x.tape().grad_slot(x);
                           for (std::size_t o = 0; o < outer; ++o) {
                             for (std::size_t in = 0; in < inner; ++in) {
                               const std::size_t base = o * len * inner + in;
                               double dot = 0.0;
                               for (std::size_t k = 0; k < len; ++k)
                                 dot += g[base + k * inner] * saved[base + k * inner];
                               for (std::size_t k = 0; k < len; ++k) {
                                 const std::size_t idx = base + k * inner;
                                 dx[idx] += saved[idx] * (g[idx] - dot);
                               }
                             }
                           }
                         });
}

Var conv2d(Var x, Var w, Var b) {
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  if (X.rank() != 3) throw DimensionError("conv2d input must be [c, h, w], got " + shape_str(X.shape()));
  if (W.rank() != 4 || W.dim(2) != 3 || W.dim(3) != 3) {
    throw DimensionError("conv2d weight must be [c_out, c_in, 3, 3], got " + shape_str(W.shape()));
  }
  if (W.dim(1) != X.dim(0)) {
    throw DimensionError("conv2d channel mismatch: input " + shape_str(X.shape()) + ", weight " +
                         shape_str(W.shape()));
  }
  const std::size_t cin = X.dim(0), h = X.dim(1), wd = X.dim(2), cout = W.dim(0);
  require_shape(b.value(), {cout}, "conv2d bias");
  Tensor y({cout, h, wd});
  const long H = static_cast<long>(h), Wd = static_cast<long>(wd);
  for (std::size_t o = 0; o < cout; ++o) {
    double* yo = y.ptr() + o * h * wd;
    std::fill(yo, yo + h * wd, b.value()[o]);
    for (std::size_t c = 0; c < cin; ++c) {
      const double* xc = X.ptr() + c * h * wd;
      for (long ky = 0; ky < 3; ++ky) {
        for (long kx = 0; kx < 3; ++kx) {
          const double wv = W[((o * cin + c) * 3 + ky) * 3 + kx];
          if (wv == 0.0) continue;
          for (long yy = 0; yy < H; ++yy) {
            const long sy = yy + ky - 1;
            if (sy < 0 || sy >= H) continue;
            for (long xx = 0; xx < Wd; ++xx) {
              const long sx = xx + kx - 1;
              if (sx < 0 || sx >= Wd) continue;
              yo[yy * Wd + xx] += wv * xc[sy * Wd + sx];
            }
          }
        }
      }
    }
  }
  const bool rg = x.requires_grad() || w.requires_grad() || b.requires_grad();
  return x.tape().record(std::move(y), rg, [x, w, b, cin, cout, H, Wd](const Tensor& g) {
    Tape& t = x.tape();
    const std::size_t plane = static_cast<std::size_t>(H * Wd);
    if (b.requires_grad()) {
      Tensor& db = t.grad_slot(b);
      for (std::size_t o = 0; o < cout; ++o) {
        double s = 0.0;
        for (std::size_t p = 0; p < plane; ++p) s += g[o * plane + p];
        db[o] += s;
      }
    }
    const Tensor& X = x.value();
    const Tensor& W = w.value();
    Tensor* dw = w.requires_grad() ? &t.grad_slot(w) : nullptr;
    Tensor* dx = x.requires_grad() ? &t.grad_slot(x) : nullptr;
    for (std::size_t o = 0; o < cout; ++o) {
      const double* go = g.ptr() + o * plane;
      for (std::size_t c = 0; c < cin; ++c) {
        const double* xc = X.ptr() + c * plane;
        for (long ky = 0; ky < 3; ++ky) {
          for (long kx = 0; kx < 3; ++kx) {
            const std::size_t widx = ((o * cin + c) * 3 + ky) * 3 + kx;
            const double wv = W[widx];
            double acc = 0.0;
            for (long yy = 0; yy < H; ++yy) {
              const long sy = yy + ky - 1;
              if (sy < 0 || sy >= H) continue;
              for (long xx = 0; xx < Wd; ++xx) {
                const long sx = xx + kx - 1;
                if (sx < 0 || sx >= Wd) continue;
                const double gv = go[yy * Wd + xx];
                acc += gv * xc[sy * Wd + sx];
                if (dx) (*dx)[c * plane + sy * Wd + sx] += wv * gv;
              }
            }
            if (dw) (*dw)[widx] += acc;
          }
        }
      }
    }
  });
}

Var attention(Var qkv, std::size_t heads) {
  const Tensor& Q = qkv.value();
  if (Q.rank() != 2 || Q.dim(1) % 3 != 0) {
    throw DimensionError("attention expects packed qkv [L, 3D], got " + shape_str(Q.shape()));
  }
  const std::size_t L = Q.dim(0), D = Q.dim(1) / 3;
  if (heads == 0 || D % heads != 0) {
    throw DimensionError("attention: width " + std::to_string(D) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  const std::size_t dh = D / heads, stride = 3 * D;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  // probs[h][i][j]
  std::vector<double> probs(heads * L * L);
  Tensor out({L, D});
  const double* P = Q.ptr();
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t qo = h * dh, ko = D + h * dh, vo = 2 * D + h * dh;
    double* A = probs.data() + h * L * L;
    for (std::size_t i = 0; i < L; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < L; ++j) {
        double s = 0.0;
        for (std::size_t d = 0; d < dh; ++d) s += P[i * stride + qo + d] * P[j * stride + ko + d];
        s *= scale;
        A[i * L + j] = s;
        mx = std::max(mx, s);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < L; ++j) {
        A[i * L + j] = std::exp(A[i * L + j] - mx);
        total += A[i * L + j];
      }
      for (std::size_t j = 0; j < L; ++j) A[i * L + j] /= total;
      double* orow = out.ptr() + i * D + h * dh;
      for (std::size_t j = 0; j < L; ++j) {
        const double a = A[i * L + j];
        const double* vrow = P + j * stride + vo;
        for (std::size_t d = 0; d < dh; ++d) orow[d] += a * vrow[d];
      }
    }
  }
  return qkv.tape().record(
      std::move(out), qkv.requires_grad(),
      [qkv, heads, L, D, dh, stride, scale, probs = std::move(probs)](const Tensor& g) {
        Tensor& dqkv = qkv.tape().grad_slot(qkv);
        const double* P = qkv.value().ptr();
        double* dP = dqkv.ptr();
        std::vector<double> dA(L);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t qo = h * dh, ko = D + h * dh, vo = 2 * D + h * dh;
          const double* A = probs.data() + h * L * L;
          for (std::size_t i = 0; i < L; ++i) {
            const double* grow = g.ptr() + i * D + h * dh;
            // dV[j] += A[i,j] dO[i];  dA[i,j] = dO[i] . V[j]
            double dot = 0.0;
            for (std::size_t j = 0; j < L; ++j) {
              const double a = A[i * L + j];
              double s = 0.0;
              for (std::size_t d = 0; d < dh; ++d) {
                s += grow[d] * P[j * stride + vo + d];
                dP[j * stride + vo + d] += a * grow[d];
              }
              dA[j] = s;
              dot += s * a;
            }
            // dS = A (dA - <dA, A>), then through the scaled dot products.
            for (std::size_t j = 0; j < L; ++j) {
              const double ds = A[i * L + j] * (dA[j] - dot) * scale;
              if (ds == 0.0) continue;
              for (std::size_t d = 0; d < dh; ++d) {
                dP[i * stride + qo + d] += ds * P[j * stride + ko + d];
                dP[j * stride + ko + d] += ds * P[i * stride + qo + d];
              }
            }
          }
        }
      });
}

Var slice_rows(Var x, std::size_t start, std::size_t count) {
  const Tensor& X = x.value();
  if (X.rank() != 2 || count == 0 || start + count > X.dim(0)) {
    throw DimensionError("slice_rows [" + std::to_string(start) + ", +" + std::to_string(count) +
                         ") out of range for " + shape_str(X.shape()));
  }
  const std::size_t d = X.dim(1);
  Tensor y({count, d});
  std::copy(X.ptr() + start * d, X.ptr() + (start + count) * d, y.ptr());
  return x.tape().record(std::move(y), x.requires_grad(), [x, start, count, d](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    for (std::size_t i = 0; i < count * d; ++i) dx[start * d + i] += g[i];
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows needs at least one part");
  const std::size_t d = parts[0].value().dim(1);
  std::size_t rows = 0;
  bool rg = false;
  for (const Var& p : parts) {
    if (p.value().rank() != 2 || p.value().dim(1) != d) {
      throw DimensionError("concat_rows: width mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    rows += p.value().dim(0);
    rg = rg || p.requires_grad();
  }
  Tensor y({rows, d});
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().ptr(), p.value().ptr() + p.value().size(), y.ptr() + off);
    off += p.value().size();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(y), rg, [owned = std::move(owned)](const Tensor& g) {
    std::size_t off = 0;
    for (const Var& p : owned) {
      const std::size_t n = p.value().size();
      if (p.requires_grad()) {
        Tensor& dp = p.tape().grad_slot(p);
        for (std::size_t i = 0; i < n; ++i) dp[i] += g[off + i];
      }
      off += n;
    }
  });
}

Var tokens_to_grid(Var x, std::size_t h, std::size_t w) {
  const Tensor& X = x.value();
  if (X.rank() != 2 || X.dim(0) != h * w) {
    throw DimensionError("tokens_to_grid: " + shape_str(X.shape()) + " is not a " + std::to_string(h) +
                         "x" + std::to_string(w) + " token grid");
  }
  const std::size_t D = X.dim(1), n = h * w;
  Tensor y({D, h, w});
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t c = 0; c < D; ++c) y[c * n + t] = X[t * D + c];
  return x.tape().record(std::move(y), x.requires_grad(), [x, D, n](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t c = 0; c < D; ++c) dx[t * D + c] += g[c * n + t];
  });
}

Var grid_to_tokens(Var x) {
  const Tensor& X = x.value();
  if (X.rank() != 3) throw DimensionError("grid_to_tokens expects [D, h, w], got " + shape_str(X.shape()));
  const std::size_t D = X.dim(0), n = X.dim(1) * X.dim(2);
  Tensor y({n, D});
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t c = 0; c < D; ++c) y[t * D + c] = X[c * n + t];
  return x.tape().record(std::move(y), x.requires_grad(), [x, D, n](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t c = 0; c < D; ++c) dx[c * n + t] += g[t * D + c];
  });
}

Var mean_rows(Var x) {
  const Tensor& X = x.value();
  if (X.rank() != 2) throw DimensionError("mean_rows expects [n, d], got " + shape_str(X.shape()));
  const std::size_t n = X.dim(0), d = X.dim(1);
  Tensor y({1, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) y[j] += X.at(i, j);
  for (std::size_t j = 0; j < d; ++j) y[j] /= static_cast<double>(n);
  return x.tape().record(std::move(y), x.requires_grad(), [x, n, d](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) dx[i * d + j] += g[j] / static_cast<double>(n);
  });
}

Var blend(Var gate, Var a, Var b) {
  if (gate.value().size() != 1) throw DimensionError("blend gate must hold one element");
  require_same_shape(a.value(), b.value(), "blend");
  const double s = gate.value()[0];
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s * a.value()[i] + (1.0 - s) * b.value()[i];
  const bool rg = gate.requires_grad() || a.requires_grad() || b.requires_grad();
  return a.tape().record(std::move(y), rg, [gate, a, b, s](const Tensor& g) {
    Tape& t = a.tape();
    if (gate.requires_grad()) {
      double dg = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dg += g[i] * (a.value()[i] - b.value()[i]);
      t.grad_slot(gate)[0] += dg;
    }
    if (a.requires_grad()) {
      Tensor& da = t.grad_slot(a);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += s * g[i];
    }
    if (b.requires_grad()) {
      Tensor& db = t.grad_slot(b);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] += (1.0 - s) * g[i];
    }
  });
}

Var select_cell(Var x, std::size_t i, std::size_t j) {
  const Tensor& X = x.value();
  if (X.rank() != 3 || i >= X.dim(1) || j >= X.dim(2)) {
    throw DimensionError("select_cell (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") outside " + shape_str(X.shape()));
  }
  const std::size_t c = X.dim(0), plane = X.dim(1) * X.dim(2), idx = i * X.dim(2) + j;
  Tensor y({c});
  for (std::size_t k = 0; k < c; ++k) y[k] = X[k * plane + idx];
  return x.tape().record(std::move(y), x.requires_grad(), [x, c, plane, idx](const Tensor& g) {
    Tensor& dx = x.tape().grad_slot(x);
    for (std::size_t k = 0; k < c; ++k) dx[k * plane + idx] += g[k];
  });
}

}  // namespace ops

}  // namespace vfpt

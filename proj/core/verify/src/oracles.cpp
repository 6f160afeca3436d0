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

#include "vfpt/verify/oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace vfpt::verify {

Tensor dft2_real_reference(const Tensor& t) {
  const std::size_t m = t.dim(0), c = t.dim(1);
  Tensor out({m, c});
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = 0; l < c; ++l) {
      double re = 0.0;
      for (std::size_t n = 0; n < m; ++n) {
        for (std::size_t q = 0; q < c; ++q) {
          // phases reduced modulo the lengths to keep the angles small
          const double a = static_cast<double>((k * n) % m) / static_cast<double>(m) +
                           static_cast<double>((l * q) % c) / static_cast<double>(c);
          re += t.at(n, q) * std::cos(two_pi * a);
        }
      }
      out.at(k, l) = re;
    }
  }
  return out;
}

Tensor matmul_reference(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  Tensor c({n, m});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a.at(i, p) * b.at(p, j);
      c.at(i, j) = s;
    }
  return c;
}

namespace {

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor y = matmul_reference(x, w);
  for (std::size_t i = 0; i < y.dim(0); ++i)
    for (std::size_t j = 0; j < y.dim(1); ++j) y.at(i, j) += b[j];
  return y;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

}  // namespace

Tensor layer_norm_reference(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor y({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += x.at(i, j);
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu);
    var /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) y.at(i, j) = (x.at(i, j) - mu) / std::sqrt(var + eps) * gamma[j] + beta[j];
  }
  return y;
}

Tensor conv3x3_reference(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2), o = w.dim(0);
  Tensor y({o, h, wd});
  for (std::size_t oc = 0; oc < o; ++oc)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < wd; ++j) {
        double s = b[oc];
        for (std::size_t ic = 0; ic < c; ++ic)
          for (std::size_t di = 0; di < 3; ++di)
            for (std::size_t dj = 0; dj < 3; ++dj) {
              const long yi = static_cast<long>(i + di) - 1, xj = static_cast<long>(j + dj) - 1;
              if (yi < 0 || xj < 0 || yi >= static_cast<long>(h) || xj >= static_cast<long>(wd)) continue;
              s += w[((oc * c + ic) * 3 + di) * 3 + dj] *
                   x.at(ic, static_cast<std::size_t>(yi), static_cast<std::size_t>(xj));
            }
        y.at(oc, i, j) = s;
      }
  return y;
}

Tensor attention_reference(const Tensor& x, const Tensor& qkv_w, const Tensor& qkv_b, std::size_t heads) {
  const std::size_t L = x.dim(0), D = x.dim(1), dh = D / heads;
  const Tensor qkv = affine(x, qkv_w, qkv_b);
  Tensor out({L, D});
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < L; ++i) {
      std::vector<double> logits(L);
      for (std::size_t j = 0; j < L; ++j) {
        double s = 0.0;
        for (std::size_t d = 0; d < dh; ++d) s += qkv.at(i, h * dh + d) * qkv.at(j, D + h * dh + d);
        logits[j] = s / std::sqrt(static_cast<double>(dh));
      }
      double mx = logits[0];
      for (double v : logits) mx = std::max(mx, v);
      double z = 0.0;
      for (double& v : logits) z += (v = std::exp(v - mx));
      for (std::size_t d = 0; d < dh; ++d) {
        double s = 0.0;
        for (std::size_t j = 0; j < L; ++j) s += logits[j] / z * qkv.at(j, 2 * D + h * dh + d);
        out.at(i, h * dh + d) = s;
      }
    }
  }
  return out;
}

Tensor vit_block_reference(const Tensor& x, const BlockParams& p, std::size_t heads, double eps) {
  const Tensor a = attention_reference(layer_norm_reference(x, p.ln1_g.value, p.ln1_b.value, eps), p.qkv_w.value,
                                       p.qkv_b.value, heads);
  const Tensor proj = affine(a, p.proj_w.value, p.proj_b.value);
  Tensor x1 = x;
  for (std::size_t k = 0; k < x1.size(); ++k) x1[k] += proj[k];
  Tensor hidden = affine(layer_norm_reference(x1, p.ln2_g.value, p.ln2_b.value, eps), p.fc1_w.value, p.fc1_b.value);
  for (double& v : hidden.data()) v = gelu(v);
  const Tensor mlp = affine(hidden, p.fc2_w.value, p.fc2_b.value);
  for (std::size_t k = 0; k < x1.size(); ++k) x1[k] += mlp[k];
  return x1;
}

namespace {

// Patch tokens of a [3, S, S] image, straight from pixel indices.
Tensor embed_reference(const Tensor& img, const EncoderParams& enc, const Tensor& pos, std::size_t patch) {
  const std::size_t g = img.dim(1) / patch, d = enc.patch_w.value.dim(1);
  Tensor tokens({g * g, d});
  for (std::size_t gy = 0; gy < g; ++gy)
    for (std::size_t gx = 0; gx < g; ++gx)
      for (std::size_t j = 0; j < d; ++j) {
        double s = enc.patch_b.value[j] + pos.at(gy * g + gx, j);
        std::size_t k = 0;
        for (std::size_t c = 0; c < 3; ++c)
          for (std::size_t py = 0; py < patch; ++py)
            for (std::size_t px = 0; px < patch; ++px)
              s += img.at(c, gy * patch + py, gx * patch + px) * enc.patch_w.value.at(k++, j);
        tokens.at(gy * g + gx, j) = s;
      }
  return tokens;
}

}  // namespace

Tensor single_stream_reference(const Tensor& template_img, const Tensor& search_img, const EncoderParams& enc,
                               const EncoderConfig& cfg) {
  const Tensor z = embed_reference(template_img, enc, enc.pos_template.value, cfg.patch);
  const Tensor xs = embed_reference(search_img, enc, enc.pos_search.value, cfg.patch);
  Tensor x({z.dim(0) + xs.dim(0), cfg.dim});
  for (std::size_t i = 0; i < z.dim(0); ++i)
    for (std::size_t j = 0; j < cfg.dim; ++j) x.at(i, j) = z.at(i, j);
  for (std::size_t i = 0; i < xs.dim(0); ++i)
    for (std::size_t j = 0; j < cfg.dim; ++j) x.at(z.dim(0) + i, j) = xs.at(i, j);
  for (const BlockParams& b : enc.blocks) x = vit_block_reference(x, b, cfg.heads, cfg.ln_eps);
  return x;
}

Tensor mfpg_reference(const Tensor& f_rgb, const Tensor& f_tir, const MfpgLayerParams& p, const TokenLayout& layout,
                      double eps) {
  const Tensor& wt = p.proj_tir ? p.proj_tir->first.value : p.proj_w.value;
  const Tensor& bt = p.proj_tir ? p.proj_tir->second.value : p.proj_b.value;
  const Tensor fr = affine(f_rgb, p.proj_w.value, p.proj_b.value);
  const Tensor ft = affine(f_tir, wt, bt);
  const std::size_t r = fr.dim(1), d = p.conv_w.value.dim(0);
  Tensor up({f_rgb.dim(0), d});
  auto segment = [&](std::size_t offset, std::size_t grid) {
    Tensor map({r, grid, grid});
    for (std::size_t t = 0; t < grid * grid; ++t)
      for (std::size_t c = 0; c < r; ++c) map.at(c, t / grid, t % grid) = fr.at(offset + t, c) + ft.at(offset + t, c);
    const Tensor y = conv3x3_reference(map, p.conv_w.value, p.conv_b.value);
    for (std::size_t t = 0; t < grid * grid; ++t)
      for (std::size_t c = 0; c < d; ++c) up.at(offset + t, c) = y.at(c, t / grid, t % grid);
  };
  segment(0, layout.template_grid);
  segment(layout.template_tokens, layout.search_grid);
  return layer_norm_reference(up, p.norm_g.value, p.norm_b.value, eps);
}

}  // namespace vfpt::verify

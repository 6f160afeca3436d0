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

#include "vfpt/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vfpt/ops.hpp"

namespace vfpt {

namespace {

std::size_t clamp_cell(double v, std::size_t n) {
  const double c = std::floor(v * static_cast<double>(n));
  if (!(c > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(c), n - 1);
}

double log_clamped(double x) { return std::log(std::max(x, kLogClamp)); }
double dlog_clamped(double x) { return x > kLogClamp ? 1.0 / x : 0.0; }

std::size_t count_positives(const Tensor& target) {
  std::size_t n = 0;
  for (double t : target.data())
    if (t == 1.0) ++n;
  return std::max<std::size_t>(n, 1);
}

struct GiouParts {
  double value;              // loss = 2 - I/U - U/C
  std::array<double, 4> d;  // d loss / d (cx, cy, w, h) of the prediction
};

// One axis of the intersection and enclosing extents plus their derivatives
// with respect to the prediction's low and high edges.
struct Axis {
  double inter, enclose;
  double di_lo, di_hi, dc_lo, dc_hi;
};

Axis axis(double p1, double p2, double g1, double g2) {
  Axis a{};
  const double lo = std::max(p1, g1), hi = std::min(p2, g2);
  a.inter = std::max(0.0, hi - lo);
  if (hi - lo > 0.0) {
    a.di_hi = p2 < g2 ? 1.0 : 0.0;
    a.di_lo = p1 > g1 ? -1.0 : 0.0;
  }
  a.enclose = std::max(p2, g2) - std::min(p1, g1);
  a.dc_hi = p2 > g2 ? 1.0 : 0.0;
  a.dc_lo = p1 < g1 ? -1.0 : 0.0;
  return a;
}

GiouParts giou_parts(const BBox& p, const BBox& g) {
  const Axis ax = axis(p.x1(), p.x2(), g.x1(), g.x2());
  const Axis ay = axis(p.y1(), p.y2(), g.y1(), g.y2());
  const double pw = std::max(0.0, p.w), ph = std::max(0.0, p.h);
  const double ap = pw * ph, ag = std::max(0.0, g.w) * std::max(0.0, g.h);
  const double inter = ax.inter * ay.inter;
  const double u = std::max(ap + ag - inter, kLogClamp);
  const double c = std::max(ax.enclose * ay.enclose, kLogClamp);
  GiouParts out{2.0 - inter / u - u / c, {}};

  const double dl_di = -1.0 / u - inter / (u * u) + 1.0 / c;
  const double dl_dap = inter / (u * u) - 1.0 / c;
  const double dl_dc = u / (c * c);
  // edges: x1, x2, y1, y2
  const double dx1 = dl_di * ax.di_lo * ay.inter + dl_dc * ax.dc_lo * ay.enclose;
  const double dx2 = dl_di * ax.di_hi * ay.inter + dl_dc * ax.dc_hi * ay.enclose;
  const double dy1 = dl_di * ay.di_lo * ax.inter + dl_dc * ay.dc_lo * ax.enclose;
  const double dy2 = dl_di * ay.di_hi * ax.inter + dl_dc * ay.dc_hi * ax.enclose;
  out.d[0] = dx1 + dx2;
  out.d[1] = dy1 + dy2;
  out.d[2] = 0.5 * (dx2 - dx1) + (p.w > 0.0 ? dl_dap * ph : 0.0);
  out.d[3] = 0.5 * (dy2 - dy1) + (p.h > 0.0 ? dl_dap * pw : 0.0);
  return out;
}

std::array<double, 4> as_array(const BBox& b) { return {b.cx, b.cy, b.w, b.h}; }

BBox box_of(const Tensor& t) { return {t[0], t[1], t[2], t[3]}; }

}  // namespace

std::pair<std::size_t, std::size_t> center_cell(const BBox& gt, std::size_t hs, std::size_t ws) {
  return {clamp_cell(gt.cy, hs), clamp_cell(gt.cx, ws)};
}

Tensor gaussian_target(const BBox& gt, std::size_t hs, std::size_t ws) {
  const auto [ci, cj] = center_cell(gt, hs, ws);
  const double sigma =
      std::max(1.0, (gt.w * static_cast<double>(ws) + gt.h * static_cast<double>(hs)) / 12.0);
  Tensor t({hs, ws});
  for (std::size_t i = 0; i < hs; ++i) {
    for (std::size_t j = 0; j < ws; ++j) {
      const double di = static_cast<double>(i) - static_cast<double>(ci);
      const double dj = static_cast<double>(j) - static_cast<double>(cj);
      t.at(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  }
  return t;
}

double focal_loss(const Tensor& score, const Tensor& target) {
  if (score.size() != target.size()) {
    throw DimensionError("focal_loss: score " + shape_str(score.shape()) + " vs target " +
                         shape_str(target.shape()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < score.size(); ++k) {
    const double p = score[k], t = target[k];
    if (t == 1.0) {
      sum -= (1.0 - p) * (1.0 - p) * log_clamped(p);
    } else {
      sum -= std::pow(1.0 - t, 4) * p * p * log_clamped(1.0 - p);
    }
  }
  return sum / static_cast<double>(count_positives(target));
}

double giou(const BBox& a, const BBox& b) { return 1.0 - giou_parts(a, b).value; }

double giou_loss(const BBox& pred, const BBox& gt) { return giou_parts(pred, gt).value; }

double l1_loss(const BBox& pred, const BBox& gt) {
  return 0.25 * (std::abs(pred.cx - gt.cx) + std::abs(pred.cy - gt.cy) + std::abs(pred.w - gt.w) +
                 std::abs(pred.h - gt.h));
}

BBox cell_box(const HeadOutputs& out, std::size_t i, std::size_t j) {
  const std::size_t hs = out.score.dim(0), ws = out.score.dim(1);
  return {(static_cast<double>(j) + out.offset.at(0, i, j)) / static_cast<double>(ws),
          (static_cast<double>(i) + out.offset.at(1, i, j)) / static_cast<double>(hs), out.size.at(0, i, j),
          out.size.at(1, i, j)};
}

LossValues total_loss(const HeadOutputs& out, const BBox& gt, const LossWeights& w) {
  const std::size_t hs = out.score.dim(0), ws = out.score.dim(1);
  const auto [i, j] = center_cell(gt, hs, ws);
  const BBox pred = cell_box(out, i, j);
  LossValues v;
  v.cls = focal_loss(out.score, gaussian_target(gt, hs, ws));
  v.giou = giou_loss(pred, gt);
  v.l1 = l1_loss(pred, gt);
  v.total = v.cls + w.lambda_giou * v.giou + w.lambda_l1 * v.l1;
  return v;
}

namespace ops {

Var focal_loss(Var score, const Tensor& target) {
  const Tensor& s = score.value();
  const double loss = vfpt::focal_loss(s, target);
  const double norm = static_cast<double>(count_positives(target));
  Tape& tape = score.tape();
  return tape.record(Tensor::scalar(loss), score.requires_grad(), [score, target, norm](const Tensor& g) {
    const Tensor& p = score.value();
    Tensor& gs = score.tape().grad_slot(score);
    const double scale = g[0] / norm;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double pk = p[k], t = target[k];
      double d;
      if (t == 1.0) {
        d = 2.0 * (1.0 - pk) * log_clamped(pk) - (1.0 - pk) * (1.0 - pk) * dlog_clamped(pk);
      } else {
        d = -std::pow(1.0 - t, 4) * (2.0 * pk * log_clamped(1.0 - pk) - pk * pk * dlog_clamped(1.0 - pk));
      }
      gs[k] += scale * d;
    }
  });
}

Var cell_box(Var offset, Var size, std::size_t i, std::size_t j) {
  const Tensor& o = offset.value();
  const Tensor& s = size.value();
  if (o.rank() != 3 || o.dim(0) != 2) throw DimensionError("cell_box: offset must be [2, Hs, Ws], got " + shape_str(o.shape()));
  require_same_shape(o, s, "cell_box");
  const std::size_t hs = o.dim(1), ws = o.dim(2);
  if (i >= hs || j >= ws) throw DimensionError("cell_box: cell outside " + shape_str(o.shape()));
  Tensor box({4});
  box[0] = (static_cast<double>(j) + o.at(0, i, j)) / static_cast<double>(ws);
  box[1] = (static_cast<double>(i) + o.at(1, i, j)) / static_cast<double>(hs);
  box[2] = s.at(0, i, j);
  box[3] = s.at(1, i, j);
  const bool rg = offset.requires_grad() || size.requires_grad();
  return offset.tape().record(std::move(box), rg, [offset, size, i, j, hs, ws](const Tensor& g) {
    Tape& tape = offset.tape();
    if (offset.requires_grad()) {
      Tensor& go = tape.grad_slot(offset);
      go.at(0, i, j) += g[0] / static_cast<double>(ws);
      go.at(1, i, j) += g[1] / static_cast<double>(hs);
    }
    if (size.requires_grad()) {
      Tensor& gs = tape.grad_slot(size);
      gs.at(0, i, j) += g[2];
      gs.at(1, i, j) += g[3];
    }
  });
}

Var giou_loss(Var box, const BBox& gt) {
  require_shape(box.value(), {4}, "giou_loss box");
  const GiouParts parts = giou_parts(box_of(box.value()), gt);
  return box.tape().record(Tensor::scalar(parts.value), box.requires_grad(), [box, parts](const Tensor& g) {
    Tensor& gb = box.tape().grad_slot(box);
    for (std::size_t k = 0; k < 4; ++k) gb[k] += g[0] * parts.d[k];
  });
}

Var l1_loss(Var box, const BBox& gt) {
  require_shape(box.value(), {4}, "l1_loss box");
  const double loss = vfpt::l1_loss(box_of(box.value()), gt);
  const std::array<double, 4> target = as_array(gt);
  return box.tape().record(Tensor::scalar(loss), box.requires_grad(), [box, target](const Tensor& g) {
    const Tensor& b = box.value();
    Tensor& gb = box.tape().grad_slot(box);
    for (std::size_t k = 0; k < 4; ++k) {
      const double diff = b[k] - target[k];
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      gb[k] += 0.25 * g[0] * sign;
    }
  });
}

}  // namespace ops

LossValues LossVars::values() const { return {total.value()[0], cls.value()[0], giou.value()[0], l1.value()[0]}; }

LossVars total_loss(const HeadVars& out, const BBox& gt, const LossWeights& w) {
  const Tensor& s = out.score.value();
  const std::size_t hs = s.dim(s.rank() - 2), ws = s.dim(s.rank() - 1);
  const auto [i, j] = center_cell(gt, hs, ws);
  LossVars v;
  v.cls = ops::focal_loss(out.score, gaussian_target(gt, hs, ws));
  Var box = ops::cell_box(out.offset, out.size, i, j);
  v.giou = ops::giou_loss(box, gt);
  v.l1 = ops::l1_loss(box, gt);
  v.total = ops::add(v.cls, ops::add(ops::scale(v.giou, w.lambda_giou), ops::scale(v.l1, w.lambda_l1)));
  return v;
}

}  // namespace vfpt

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

#include "vfpt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "text_util.hpp"
#include "vfpt/errors.hpp"

namespace vfpt {

double iou(const ImageBox& a, const ImageBox& b) {
  const double ax2 = a.x + a.w, ay2 = a.y + a.h, bx2 = b.x + b.w, by2 = b.y + b.h;
  const double area_a = std::max(0.0, ax2 - a.x) * std::max(0.0, ay2 - a.y);
  const double area_b = std::max(0.0, bx2 - b.x) * std::max(0.0, by2 - b.y);
  const double iw = std::min(ax2, bx2) - std::max(a.x, b.x);
  const double ih = std::min(ay2, by2) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double center_error(const ImageBox& pred, const ImageBox& gt) {
  return std::hypot(pred.cx() - gt.cx(), pred.cy() - gt.cy());
}

double norm_center_error(const ImageBox& pred, const ImageBox& gt) {
  return std::hypot((pred.cx() - gt.cx()) / gt.w, (pred.cy() - gt.cy()) / gt.h);
}

namespace {

std::vector<double> grid(std::size_t steps, double denom) {
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = static_cast<double>(k) / denom;
  return t;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void write_curve(const std::filesystem::path& path, const std::vector<double>& thresholds,
                 const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "threshold,value\n";
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    out << detail::fmt_double(thresholds[k]) << ',' << detail::fmt_double(values[k]) << '\n';
  }
}

}  // namespace

std::vector<double> success_thresholds() { return grid(20, 20.0); }
std::vector<double> precision_thresholds() { return grid(50, 1.0); }
std::vector<double> norm_precision_thresholds() { return grid(50, 100.0); }

SequenceReport evaluate(const std::vector<ImageBox>& preds, const std::vector<ImageBox>& gts,
                        const std::string& name) {
  if (preds.size() != gts.size()) {
    throw DimensionError("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(gts.size()) + " ground-truth frames");
  }
  SequenceReport r;
  r.name = name;
  r.frames = gts.size();
  std::vector<double> ious, errs, nerrs;
  for (std::size_t t = 0; t < gts.size(); ++t) {
    ious.push_back(iou(preds[t], gts[t]));
    errs.push_back(center_error(preds[t], gts[t]));
    nerrs.push_back(norm_center_error(preds[t], gts[t]));
  }
  const double n = std::max<double>(1.0, static_cast<double>(r.frames));
  for (double tau : success_thresholds()) {
    const auto hit = [tau](double v) { return tau >= 1.0 ? v >= 1.0 : v > tau; };
    r.success.push_back(static_cast<double>(std::count_if(ious.begin(), ious.end(), hit)) / n);
  }
  for (double th : precision_thresholds()) {
    r.precision.push_back(
        static_cast<double>(std::count_if(errs.begin(), errs.end(), [th](double e) { return e <= th; })) / n);
  }
  for (double th : norm_precision_thresholds()) {
    r.norm_precision.push_back(
        static_cast<double>(std::count_if(nerrs.begin(), nerrs.end(), [th](double e) { return e <= th; })) / n);
  }
  r.sr = mean(r.success);
  r.pr = static_cast<double>(
             std::count_if(errs.begin(), errs.end(), [](double e) { return e <= kPrecisionThreshold; })) /
         n;
  r.npr = static_cast<double>(
              std::count_if(nerrs.begin(), nerrs.end(), [](double e) { return e <= kNormPrecisionThreshold; })) /
          n;
  return r;
}

EvalReport aggregate(std::vector<SequenceReport> sequences) {
  EvalReport rep;
  rep.overall.name = "overall";
  rep.overall.success.assign(success_thresholds().size(), 0.0);
  rep.overall.precision.assign(precision_thresholds().size(), 0.0);
  rep.overall.norm_precision.assign(norm_precision_thresholds().size(), 0.0);
  std::size_t total = 0;
  for (const SequenceReport& s : sequences) total += s.frames;
  if (total > 0) {
    for (const SequenceReport& s : sequences) {
      const double w = static_cast<double>(s.frames) / static_cast<double>(total);
      rep.overall.sr += w * s.sr;
      rep.overall.pr += w * s.pr;
      rep.overall.npr += w * s.npr;
      for (std::size_t k = 0; k < s.success.size(); ++k) rep.overall.success[k] += w * s.success[k];
      for (std::size_t k = 0; k < s.precision.size(); ++k) rep.overall.precision[k] += w * s.precision[k];
      for (std::size_t k = 0; k < s.norm_precision.size(); ++k) rep.overall.norm_precision[k] += w * s.norm_precision[k];
    }
  }
  // a single sequence reports its own numbers exactly
  if (sequences.size() == 1) {
    const std::string name = rep.overall.name;
    rep.overall = sequences.front();
    rep.overall.name = name;
  }
  rep.overall.frames = total;
  rep.sequences = std::move(sequences);
  return rep;
}

void write_report(const EvalReport& report, const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  if (!header.empty()) out << header;
  auto emit = [&out](const std::string& prefix, const SequenceReport& s) {
    out << prefix << "frames = " << s.frames << '\n';
    out << prefix << "sr = " << detail::fmt_double(s.sr) << '\n';
    out << prefix << "pr = " << detail::fmt_double(s.pr) << '\n';
    out << prefix << "npr = " << detail::fmt_double(s.npr) << '\n';
  };
  emit("", report.overall);
  for (const SequenceReport& s : report.sequences) emit("sequence." + s.name + ".", s);
  const auto dir = path.parent_path();
  const std::string stem = path.stem().string();
  write_curve(dir / (stem + "_success.csv"), success_thresholds(), report.overall.success);
  write_curve(dir / (stem + "_precision.csv"), precision_thresholds(), report.overall.precision);
  write_curve(dir / (stem + "_norm_precision.csv"), norm_precision_thresholds(), report.overall.norm_precision);
}

}  // namespace vfpt

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

#include "vfpt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "text_util.hpp"
#include "vfpt/image.hpp"
#include "vfpt/random.hpp"

namespace vfpt {

namespace {

using detail::fmt_double;
using detail::trim;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<EventWindow> parse_windows(const std::string& key, const std::string& v) {
  std::vector<EventWindow> out;
  if (v.empty() || v == "none") return out;
  for (const std::string& item : split(v, ',')) {
    const auto dash = item.find('-');
    EventWindow w;
    if (dash == std::string::npos) {
      w.first = w.last = detail::to_size(key, item);
    } else {
      w.first = detail::to_size(key, trim(item.substr(0, dash)));
      w.last = detail::to_size(key, trim(item.substr(dash + 1)));
    }
    out.push_back(w);
  }
  return out;
}

std::string windows_text(const std::vector<EventWindow>& ws) {
  if (ws.empty()) return "none";
  std::string out;
  for (const EventWindow& w : ws) {
    if (!out.empty()) out += ", ";
    out += std::to_string(w.first) + "-" + std::to_string(w.last);
  }
  return out;
}

std::vector<Waypoint> parse_waypoints(const std::string& v) {
  std::vector<Waypoint> out;
  if (v.empty() || v == "auto") return out;
  for (const std::string& item : split(v, ' ')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw ConfigError("waypoints: expected frame:cx:cy, got '" + item + "'");
    out.push_back({detail::to_size("waypoints", parts[0]), detail::to_double("waypoints", parts[1]),
                   detail::to_double("waypoints", parts[2])});
  }
  return out;
}

std::string waypoints_text(const std::vector<Waypoint>& ws) {
  if (ws.empty()) return "auto";
  std::string out;
  for (const Waypoint& w : ws) {
    if (!out.empty()) out += " ";
    out += std::to_string(w.frame) + ":" + fmt_double(w.cx) + ":" + fmt_double(w.cy);
  }
  return out;
}

void check_windows(const char* key, const std::vector<EventWindow>& ws, std::size_t length) {
  for (const EventWindow& w : ws) {
    if (w.first > w.last || w.last >= length) {
      throw ConfigError(std::string(key) + ": window " + std::to_string(w.first) + "-" + std::to_string(w.last) +
                        " is not inside frames [0, " + std::to_string(length) + ")");
    }
  }
}

bool active(const std::vector<EventWindow>& ws, std::size_t t) {
  return std::any_of(ws.begin(), ws.end(), [t](const EventWindow& w) { return w.contains(t); });
}

double clamp_center(double c, double extent, double limit) {
  const double lo = 0.5 * extent, hi = limit - 0.5 * extent;
  return std::clamp(c, lo, hi);
}

struct Scene {
  double bg_rgb[3];
  double target_rgb[3];
  double rgb_phase[3][2];
  double rgb_freq[2];
  double bg_tir;
  double target_tir;
  double tir_phase[2];
  double tir_freq[2];

  double background_rgb(std::size_t c, double x, double y) const {
    return bg_rgb[c] + 0.06 * std::sin(rgb_freq[0] * x + rgb_phase[c][0]) * std::cos(rgb_freq[1] * y + rgb_phase[c][1]);
  }
  double background_tir(double x, double y) const {
    return bg_tir + 0.04 * std::sin(tir_freq[0] * x + tir_phase[0]) * std::cos(tir_freq[1] * y + tir_phase[1]);
  }
};

Scene make_scene(std::uint64_t seed) {
  Rng rng(seed, "scene");
  Scene s{};
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t c = 0; c < 3; ++c) {
    s.bg_rgb[c] = rng.uniform(0.35, 0.6);
    const double sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    s.target_rgb[c] = std::clamp(s.bg_rgb[c] + sign * rng.uniform(0.22, 0.32), 0.05, 0.95);
    s.rgb_phase[c][0] = rng.uniform(0.0, two_pi);
    s.rgb_phase[c][1] = rng.uniform(0.0, two_pi);
  }
  s.rgb_freq[0] = rng.uniform(0.05, 0.12);
  s.rgb_freq[1] = rng.uniform(0.05, 0.12);
  s.bg_tir = rng.uniform(0.25, 0.4);
  s.target_tir = rng.uniform(0.75, 0.9);
  s.tir_phase[0] = rng.uniform(0.0, two_pi);
  s.tir_phase[1] = rng.uniform(0.0, two_pi);
  s.tir_freq[0] = rng.uniform(0.04, 0.1);
  s.tir_freq[1] = rng.uniform(0.04, 0.1);
  return s;
}

// Colour twins copy the target in RGB only; heat twins copy it in TIR only.
struct Distractor {
  bool heat_twin;
  double w, h;
  double x, y;  // centre at frame 0
  double vx, vy;
};

std::vector<Distractor> make_distractors(const SyntheticSpec& spec) {
  Rng rng(spec.seed, "distractors");
  std::vector<Distractor> out;
  for (std::size_t k = 0; k < spec.distractors; ++k) {
    Distractor d{};
    d.heat_twin = k % 2 == 1;
    d.w = spec.target_w * rng.uniform(0.8, 1.2);
    d.h = spec.target_h * rng.uniform(0.8, 1.2);
    d.x = rng.uniform(0.5 * d.w, static_cast<double>(spec.width) - 0.5 * d.w);
    d.y = rng.uniform(0.5 * d.h, static_cast<double>(spec.height) - 0.5 * d.h);
    d.vx = rng.uniform(-1.5, 1.5);
    d.vy = rng.uniform(-1.5, 1.5);
    out.push_back(d);
  }
  return out;
}

// Position after t frames of straight motion reflected at the borders.
double bounce(double start, double v, std::size_t t, double lo, double hi) {
  if (hi <= lo) return lo;
  const double span = hi - lo;
  double p = std::fmod(start - lo + v * static_cast<double>(t), 2.0 * span);
  if (p < 0) p += 2.0 * span;
  return lo + (p <= span ? p : 2.0 * span - p);
}

bool inside(TargetShape shape, double cx, double cy, double w, double h, double px, double py) {
  if (shape == TargetShape::kRectangle) {
    return px >= cx - 0.5 * w && px < cx + 0.5 * w && py >= cy - 0.5 * h && py < cy + 0.5 * h;
  }
  const double dx = (px - cx) / (0.5 * w), dy = (py - cy) / (0.5 * h);
  return dx * dx + dy * dy <= 1.0;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (length == 0) throw ConfigError("length: must be >= 1");
  if (width < 16 || height < 16) throw ConfigError("width/height: images must be at least 16x16");
  if (!(target_w > 0.0) || target_w >= static_cast<double>(width)) {
    throw ConfigError("target_w: must be in (0, width)");
  }
  if (!(target_h > 0.0) || target_h >= static_cast<double>(height)) {
    throw ConfigError("target_h: must be in (0, height)");
  }
  if (jitter < 0.0) throw ConfigError("jitter: must be >= 0");
  if (noise_rgb < 0.0 || noise_tir < 0.0) throw ConfigError("noise_rgb/noise_tir: must be >= 0");
  check_windows("darkness", darkness, length);
  check_windows("crossover", crossover, length);
  check_windows("occlusion", occlusion, length);
  for (std::size_t k = 0; k < waypoints.size(); ++k) {
    const Waypoint& w = waypoints[k];
    if (k > 0 && w.frame <= waypoints[k - 1].frame) throw ConfigError("waypoints: frames must increase");
    if (w.frame >= length) throw ConfigError("waypoints: frame " + std::to_string(w.frame) + " is past the end");
    if (w.cx - 0.5 * target_w < 0 || w.cx + 0.5 * target_w > static_cast<double>(width) ||
        w.cy - 0.5 * target_h < 0 || w.cy + 0.5 * target_h > static_cast<double>(height)) {
      throw ConfigError("waypoints: target at frame " + std::to_string(w.frame) + " is not inside the image");
    }
  }
}

std::string SyntheticSpec::to_text() const {
  std::string out;
  auto put = [&out](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  put("length", std::to_string(length));
  put("width", std::to_string(width));
  put("height", std::to_string(height));
  put("shape", shape == TargetShape::kRectangle ? "rectangle" : "disc");
  put("target_w", fmt_double(target_w));
  put("target_h", fmt_double(target_h));
  put("waypoints", waypoints_text(waypoints));
  put("jitter", fmt_double(jitter));
  put("distractors", std::to_string(distractors));
  put("darkness", windows_text(darkness));
  put("crossover", windows_text(crossover));
  put("occlusion", windows_text(occlusion));
  put("noise_rgb", fmt_double(noise_rgb));
  put("noise_tir", fmt_double(noise_tir));
  put("seed", std::to_string(seed));
  return out;
}

SyntheticSpec SyntheticSpec::parse(const std::string& text, const std::string& source) {
  SyntheticSpec s;
  detail::for_each_entry(text, source, [&s](const std::string& k, const std::string& v) {
    if (k == "length") s.length = detail::to_size(k, v);
    else if (k == "width") s.width = detail::to_size(k, v);
    else if (k == "height") s.height = detail::to_size(k, v);
    else if (k == "shape") {
      if (v == "rectangle") s.shape = TargetShape::kRectangle;
      else if (v == "disc") s.shape = TargetShape::kDisc;
      else throw ConfigError("shape: expected rectangle or disc, got '" + v + "'");
    } else if (k == "target_w") s.target_w = detail::to_double(k, v);
    else if (k == "target_h") s.target_h = detail::to_double(k, v);
    else if (k == "waypoints") s.waypoints = parse_waypoints(v);
    else if (k == "jitter") s.jitter = detail::to_double(k, v);
    else if (k == "distractors") s.distractors = detail::to_size(k, v);
    else if (k == "darkness") s.darkness = parse_windows(k, v);
    else if (k == "crossover") s.crossover = parse_windows(k, v);
    else if (k == "occlusion") s.occlusion = parse_windows(k, v);
    else if (k == "noise_rgb") s.noise_rgb = detail::to_double(k, v);
    else if (k == "noise_tir") s.noise_tir = detail::to_double(k, v);
    else if (k == "seed") s.seed = detail::to_size(k, v);
    else throw ConfigError("unknown key '" + k + "'");
  });
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return s;
}

SyntheticSpec SyntheticSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::vector<Waypoint> resolve_waypoints(const SyntheticSpec& spec) {
  if (!spec.waypoints.empty()) return spec.waypoints;
  Rng rng(spec.seed, "waypoints");
  const double w = static_cast<double>(spec.width), h = static_cast<double>(spec.height);
  const double lo_x = 0.5 * spec.target_w + 1.0, hi_x = w - 0.5 * spec.target_w - 1.0;
  const double lo_y = 0.5 * spec.target_h + 1.0, hi_y = h - 0.5 * spec.target_h - 1.0;
  std::vector<Waypoint> out;
  Waypoint cur{0, rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)};
  out.push_back(cur);
  for (std::size_t f = 10; f < spec.length + 9; f += 10) {
    const std::size_t frame = std::min(f, spec.length - 1);
    if (frame <= out.back().frame) break;
    cur = {frame, std::clamp(cur.cx + rng.uniform(-30.0, 30.0), lo_x, hi_x),
           std::clamp(cur.cy + rng.uniform(-24.0, 24.0), lo_y, hi_y)};
    out.push_back(cur);
  }
  return out;
}

std::pair<double, double> interpolate(const std::vector<Waypoint>& ws, std::size_t t) {
  if (ws.empty()) throw ConfigError("interpolate: no waypoints");
  if (t <= ws.front().frame) return {ws.front().cx, ws.front().cy};
  for (std::size_t k = 1; k < ws.size(); ++k) {
    if (t <= ws[k].frame) {
      const Waypoint& a = ws[k - 1];
      const Waypoint& b = ws[k];
      if (t == b.frame) return {b.cx, b.cy};
      const double u = static_cast<double>(t - a.frame) / static_cast<double>(b.frame - a.frame);
      return {a.cx + u * (b.cx - a.cx), a.cy + u * (b.cy - a.cy)};
    }
  }
  return {ws.back().cx, ws.back().cy};
}

Sequence generate(const SyntheticSpec& spec, const std::string& name) {
  spec.validate();
  const std::vector<Waypoint> ws = resolve_waypoints(spec);
  const Scene scene = make_scene(spec.seed);
  const std::vector<Distractor> distractors = make_distractors(spec);
  Rng jitter_rng(spec.seed, "trajectory");
  const std::size_t H = spec.height, W = spec.width;
  const double wd = static_cast<double>(W), hd = static_cast<double>(H);

  Sequence seq;
  seq.name = name;
  seq.spec = spec;
  seq.frames.reserve(spec.length);
  for (std::size_t t = 0; t < spec.length; ++t) {
    auto [cx, cy] = interpolate(ws, t);
    const double jx = jitter_rng.normal(0.0, 1.0) * spec.jitter;
    const double jy = jitter_rng.normal(0.0, 1.0) * spec.jitter;
    const bool at_waypoint = std::any_of(ws.begin(), ws.end(), [t](const Waypoint& w) { return w.frame == t; });
    if (!at_waypoint) {
      cx = clamp_center(cx + jx, spec.target_w, wd);
      cy = clamp_center(cy + jy, spec.target_h, hd);
    }

    Frame f;
    f.gt = {cx - 0.5 * spec.target_w, cy - 0.5 * spec.target_h, spec.target_w, spec.target_h};
    if (active(spec.darkness, t)) f.flags |= kFlagDark;
    if (active(spec.crossover, t)) f.flags |= kFlagCrossover;
    if (active(spec.occlusion, t)) f.flags |= kFlagOccluded;

    f.rgb = Tensor({3, H, W});
    f.tir = Tensor({1, H, W});
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
        double rgb[3] = {scene.background_rgb(0, px, py), scene.background_rgb(1, px, py),
                         scene.background_rgb(2, px, py)};
        double tir = scene.background_tir(px, py);
        for (const Distractor& d : distractors) {
          const double dx = bounce(d.x, d.vx, t, 0.5 * d.w, wd - 0.5 * d.w);
          const double dy = bounce(d.y, d.vy, t, 0.5 * d.h, hd - 0.5 * d.h);
          if (!inside(spec.shape, dx, dy, d.w, d.h, px, py)) continue;
          if (d.heat_twin) {
            tir = scene.target_tir;
          } else {
            for (std::size_t c = 0; c < 3; ++c) rgb[c] = scene.target_rgb[c];
            tir = scene.background_tir(px, py);
          }
        }
        if (inside(spec.shape, cx, cy, spec.target_w, spec.target_h, px, py)) {
          for (std::size_t c = 0; c < 3; ++c) rgb[c] = scene.target_rgb[c];
          tir = (f.flags & kFlagCrossover) ? scene.background_tir(px, py) : scene.target_tir;
        }
        if ((f.flags & kFlagOccluded) &&
            inside(TargetShape::kRectangle, cx, cy, 1.4 * spec.target_w, 1.4 * spec.target_h, px, py)) {
          rgb[0] = 0.22;
          rgb[1] = 0.22;
          rgb[2] = 0.26;
          tir = 0.55;
        }
        for (std::size_t c = 0; c < 3; ++c) f.rgb.at(c, y, x) = rgb[c];
        f.tir.at(0, y, x) = tir;
      }
    }
    if (f.flags & kFlagDark)
      for (double& v : f.rgb.data()) v *= 0.05;

    Rng rgb_noise(spec.seed, "noise.rgb." + std::to_string(t));
    Rng tir_noise(spec.seed, "noise.tir." + std::to_string(t));
    for (double& v : f.rgb.data()) v = std::clamp(v + rgb_noise.normal(0.0, 1.0) * spec.noise_rgb, 0.0, 1.0);
    for (double& v : f.tir.data()) v = std::clamp(v + tir_noise.normal(0.0, 1.0) * spec.noise_tir, 0.0, 1.0);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

std::string frame_file(std::size_t t, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.%s", t, ext);
  return buf;
}

void save_sequence(const Sequence& seq, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "tir");
  std::ofstream gt(dir / "gt.txt");
  if (!gt) throw Error((dir / "gt.txt").string() + ": cannot open for writing");
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const Frame& f = seq.frames[t];
    write_pnm(dir / "rgb" / frame_file(t, "ppm"), f.rgb);
    write_pnm(dir / "tir" / frame_file(t, "pgm"), f.tir);
    gt << t << ',' << fmt_double(f.gt.x) << ',' << fmt_double(f.gt.y) << ',' << fmt_double(f.gt.w) << ','
       << fmt_double(f.gt.h) << ',' << f.flags << '\n';
  }
  std::ofstream spec(dir / "spec.txt");
  if (!spec) throw Error((dir / "spec.txt").string() + ": cannot open for writing");
  spec << seq.spec.to_text();
}

Sequence load_sequence(const std::filesystem::path& dir) {
  Sequence seq;
  seq.name = dir.filename().string();
  if (seq.name.empty()) seq.name = dir.parent_path().filename().string();
  try {
    seq.spec = SyntheticSpec::load(dir / "spec.txt");
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }

  const auto gt_path = dir / "gt.txt";
  std::ifstream in(gt_path, std::ios::binary);
  if (!in) throw ParseError(gt_path.string() + ": cannot open");
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    auto fail = [&](const std::string& what) {
      throw ParseError(gt_path.string() + ": byte " + std::to_string(line_start) + ": " + what);
    };
    if (fields.size() != 6) fail("expected frame_idx,x,y,w,h,flags");
    Frame f;
    try {
      const std::size_t idx = detail::to_size("frame_idx", fields[0]);
      if (idx != seq.frames.size()) fail("expected frame " + std::to_string(seq.frames.size()));
      f.gt = {detail::to_double("x", fields[1]), detail::to_double("y", fields[2]), detail::to_double("w", fields[3]),
              detail::to_double("h", fields[4])};
      f.flags = static_cast<unsigned>(detail::to_size("flags", fields[5]));
    } catch (const ConfigError& e) {
      fail(e.what());
    }
    seq.frames.push_back(std::move(f));
  }
  if (seq.frames.size() != seq.spec.length) {
    throw ParseError(gt_path.string() + ": " + std::to_string(seq.frames.size()) + " annotations for " +
                     std::to_string(seq.spec.length) + " frames");
  }
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    Frame& f = seq.frames[t];
    f.rgb = read_pnm(dir / "rgb" / frame_file(t, "ppm"));
    f.tir = read_pnm(dir / "tir" / frame_file(t, "pgm"));
    if (f.rgb.shape() != Shape{3, seq.spec.height, seq.spec.width} ||
        f.tir.shape() != Shape{1, seq.spec.height, seq.spec.width}) {
      throw ParseError((dir / "rgb" / frame_file(t, "ppm")).string() + ": frame size does not match spec.txt");
    }
  }
  return seq;
}

std::vector<Sequence> load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError(dir.string() + ": not a directory");
  if (fs::exists(dir / "gt.txt")) return {load_sequence(dir)};
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "gt.txt")) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty()) throw ParseError(dir.string() + ": no sequences found");
  std::vector<Sequence> out;
  for (const auto& p : subdirs) out.push_back(load_sequence(p));
  return out;
}

}  // namespace vfpt

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

#include "vfpt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "text_util.hpp"

namespace vfpt {

using detail::fmt_double;
using detail::to_bool;
using detail::to_double;
using detail::to_size;
using detail::trim;

LayerSelection LayerSelection::range(std::size_t first, std::size_t last) {
  LayerSelection s = none();
  for (std::size_t l = first; l <= last; ++l) s.explicit_layers.insert(l);
  return s;
}

std::set<std::size_t> LayerSelection::resolve(std::size_t layer_count) const {
  if (!all) return explicit_layers;
  std::set<std::size_t> out;
  for (std::size_t l = 1; l <= layer_count; ++l) out.insert(l);
  return out;
}

namespace {

std::size_t parse_index(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("expected a layer index, got '" + s + "'");
  }
  if (pos != s.size() || s.find('-') != std::string::npos) throw ConfigError("expected a layer index, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

LayerSelection LayerSelection::parse(const std::string& text) {
  const std::string t = trim(text);
  if (t == "all") return every();
  if (t == "none" || t.empty()) return none();
  LayerSelection s = none();
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      s.explicit_layers.insert(parse_index(item));
    } else {
      const std::size_t a = parse_index(trim(item.substr(0, dash)));
      const std::size_t b = parse_index(trim(item.substr(dash + 1)));
      if (a > b) throw ConfigError("empty layer range '" + item + "'");
      for (std::size_t l = a; l <= b; ++l) s.explicit_layers.insert(l);
    }
  }
  return s;
}

std::string LayerSelection::to_string() const {
  if (all) return "all";
  if (explicit_layers.empty()) return "none";
  std::string out;
  auto it = explicit_layers.begin();
  while (it != explicit_layers.end()) {
    const std::size_t start = *it;
    std::size_t end = start;
    ++it;
    while (it != explicit_layers.end() && *it == end + 1) {
      end = *it;
      ++it;
    }
    if (!out.empty()) out += ',';
    out += std::to_string(start);
    if (end != start) out += '-' + std::to_string(end);
  }
  return out;
}

TokenLayout EncoderConfig::layout(std::size_t prompt_count) const {
  return TokenLayout{prompt_count, template_tokens(), search_tokens(), template_grid(), search_grid()};
}

void EncoderConfig::validate() const {
  if (layers == 0) throw ConfigError("encoder.layers must be >= 1");
  if (dim == 0 || heads == 0 || mlp_ratio == 0 || patch == 0) {
    throw ConfigError("encoder.dim, encoder.heads, encoder.mlp_ratio and encoder.patch must be positive");
  }
  if (dim % heads != 0) {
    throw ConfigError("encoder.dim (" + std::to_string(dim) + ") must be divisible by encoder.heads (" +
                      std::to_string(heads) + ")");
  }
  if (template_size == 0 || template_size % patch != 0) {
    throw ConfigError("encoder.template_size (" + std::to_string(template_size) +
                      ") must be a positive multiple of encoder.patch (" + std::to_string(patch) + ")");
  }
  if (search_size == 0 || search_size % patch != 0) {
    throw ConfigError("encoder.search_size (" + std::to_string(search_size) +
                      ") must be a positive multiple of encoder.patch (" + std::to_string(patch) + ")");
  }
  if (!(ln_eps > 0.0)) throw ConfigError("encoder.ln_eps must be > 0");
}

std::size_t PromptConfig::fourier_count() const {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(count) + 0.5));
}

namespace {

void check_layers(const LayerSelection& s, std::size_t n, const char* key) {
  for (std::size_t l : s.explicit_layers) {
    if (l < 1 || l > n) {
      throw ConfigError(std::string(key) + " contains layer " + std::to_string(l) + " outside 1.." +
                        std::to_string(n));
    }
  }
}

}  // namespace

void PromptConfig::validate(std::size_t layer_count) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("prompt.alpha must lie in [0, 1]");
  check_layers(layers, layer_count, "prompt.layers");
  if (fourier_count() > count) throw ConfigError("prompt.alpha selects more Fourier rows than prompt.count");
}

Config Config::desk() { return Config{}; }

Config Config::full_scale() {
  Config c;
  c.encoder.layers = 12;
  c.encoder.dim = 768;
  c.encoder.heads = 12;
  c.encoder.patch = 16;
  c.encoder.template_size = 128;
  c.encoder.search_size = 256;
  c.mfpg.beta = 96;
  return c;
}

void Config::validate() const {
  encoder.validate();
  prompt.validate(encoder.layers);
  check_layers(mfpg.layers, encoder.layers, "mfpg.layers");
  if (mfpg.beta == 0 || encoder.dim % mfpg.beta != 0) {
    throw ConfigError("mfpg.beta (" + std::to_string(mfpg.beta) + ") must divide encoder.dim (" +
                      std::to_string(encoder.dim) + ")");
  }
  if (loss.lambda_giou < 0 || loss.lambda_l1 < 0) throw ConfigError("loss weights must be nonnegative");
  if (!(optim.lr > 0)) throw ConfigError("optim.lr must be > 0");
  if (optim.weight_decay < 0) throw ConfigError("optim.weight_decay must be >= 0");
  if (!(optim.beta1 >= 0 && optim.beta1 < 1) || !(optim.beta2 >= 0 && optim.beta2 < 1)) {
    throw ConfigError("optim.beta1 and optim.beta2 must lie in [0, 1)");
  }
  if (!(optim.eps > 0)) throw ConfigError("optim.eps must be > 0");
  if (!(optim.lr_drop_at >= 0 && optim.lr_drop_at <= 1)) throw ConfigError("optim.lr_drop_at must lie in [0, 1]");
  if (!(optim.lr_drop_factor > 0)) throw ConfigError("optim.lr_drop_factor must be > 0");
  if (optim.steps == 0) throw ConfigError("optim.steps must be >= 1");
  if (train.max_gap == 0) throw ConfigError("train.max_gap must be >= 1");
  if (train.center_jitter < 0) throw ConfigError("train.center_jitter must be >= 0");
  if (!(train.scale_jitter >= 0 && train.scale_jitter < 1)) throw ConfigError("train.scale_jitter must lie in [0, 1)");
  if (!(track.gamma >= 0 && track.gamma <= 1)) throw ConfigError("track.gamma must lie in [0, 1]");
  if (!(track.template_factor > 0) || !(track.search_factor > 0)) {
    throw ConfigError("track.template_factor and track.search_factor must be > 0");
  }
}

namespace {

struct Field {
  std::string key;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define VFPT_SIZE(key, member)                                                                      \
  Field {                                                                                           \
    key, [](Config& c, const std::string& v) { c.member = to_size(key, v); },                      \
        [](const Config& c) { return std::to_string(c.member); }                                    \
  }
#define VFPT_DOUBLE(key, member)                                                                    \
  Field {                                                                                           \
    key, [](Config& c, const std::string& v) { c.member = to_double(key, v); },                    \
        [](const Config& c) { return fmt_double(c.member); }                                        \
  }
#define VFPT_BOOL(key, member)                                                                      \
  Field {                                                                                           \
    key, [](Config& c, const std::string& v) { c.member = to_bool(key, v); },                      \
        [](const Config& c) { return std::string(c.member ? "true" : "false"); }                    \
  }
#define VFPT_LAYERS(key, member)                                                                    \
  Field {                                                                                           \
    key,                                                                                            \
        [](Config& c, const std::string& v) {                                                       \
          try {                                                                                     \
            c.member = LayerSelection::parse(v);                                                    \
          } catch (const ConfigError& e) {                                                          \
            throw ConfigError(std::string(key) + ": " + e.what());                                  \
          }                                                                                         \
        },                                                                                          \
        [](const Config& c) { return c.member.to_string(); }                                        \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed", [](Config& c, const std::string& v) { c.seed = to_size("seed", v); },
            [](const Config& c) { return std::to_string(c.seed); }},
      VFPT_SIZE("encoder.layers", encoder.layers),
      VFPT_SIZE("encoder.dim", encoder.dim),
      VFPT_SIZE("encoder.heads", encoder.heads),
      VFPT_SIZE("encoder.mlp_ratio", encoder.mlp_ratio),
      VFPT_SIZE("encoder.patch", encoder.patch),
      VFPT_SIZE("encoder.template_size", encoder.template_size),
      VFPT_SIZE("encoder.search_size", encoder.search_size),
      VFPT_DOUBLE("encoder.ln_eps", encoder.ln_eps),
      VFPT_SIZE("prompt.count", prompt.count),
      VFPT_DOUBLE("prompt.alpha", prompt.alpha),
      VFPT_LAYERS("prompt.layers", prompt.layers),
      Field{"prompt.fft_mode",
            [](Config& c, const std::string& v) {
              try {
                c.prompt.fft_mode = parse_fft_mode(v);
              } catch (const ConfigError& e) {
                throw ConfigError(std::string("prompt.fft_mode: ") + e.what());
              }
            },
            [](const Config& c) { return to_string(c.prompt.fft_mode); }},
      Field{"prompt.fft_output",
            [](Config& c, const std::string& v) {
              try {
                c.prompt.fft_output = parse_fft_output(v);
              } catch (const ConfigError& e) {
                throw ConfigError(std::string("prompt.fft_output: ") + e.what());
              }
            },
            [](const Config& c) { return to_string(c.prompt.fft_output); }},
      VFPT_BOOL("prompt.adaptive_alpha", prompt.adaptive_alpha),
      VFPT_BOOL("prompt.fourier_enabled", prompt.fourier_enabled),
      VFPT_BOOL("prompt.shared_transform", prompt.shared_transform),
      VFPT_LAYERS("mfpg.layers", mfpg.layers),
      VFPT_SIZE("mfpg.beta", mfpg.beta),
      VFPT_BOOL("mfpg.shared_projection", mfpg.shared_projection),
      VFPT_DOUBLE("loss.lambda_giou", loss.lambda_giou),
      VFPT_DOUBLE("loss.lambda_l1", loss.lambda_l1),
      VFPT_DOUBLE("optim.lr", optim.lr),
      VFPT_DOUBLE("optim.weight_decay", optim.weight_decay),
      VFPT_DOUBLE("optim.beta1", optim.beta1),
      VFPT_DOUBLE("optim.beta2", optim.beta2),
      VFPT_DOUBLE("optim.eps", optim.eps),
      VFPT_DOUBLE("optim.lr_drop_at", optim.lr_drop_at),
      VFPT_DOUBLE("optim.lr_drop_factor", optim.lr_drop_factor),
      VFPT_SIZE("optim.steps", optim.steps),
      VFPT_SIZE("train.max_gap", train.max_gap),
      VFPT_DOUBLE("train.center_jitter", train.center_jitter),
      VFPT_DOUBLE("train.scale_jitter", train.scale_jitter),
      VFPT_SIZE("train.log_every", train.log_every),
      VFPT_DOUBLE("track.gamma", track.gamma),
      VFPT_DOUBLE("track.template_factor", track.template_factor),
      VFPT_DOUBLE("track.search_factor", track.search_factor),
  };
  return table;
}

#undef VFPT_SIZE
#undef VFPT_DOUBLE
#undef VFPT_BOOL
#undef VFPT_LAYERS

}  // namespace

std::string Config::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

Config Config::parse(const std::string& text, const std::string& source) {
  static const std::map<std::string, const Field*> index = [] {
    std::map<std::string, const Field*> m;
    for (const Field& f : fields()) m[f.key] = &f;
    return m;
  }();
  Config c = desk();
  detail::for_each_entry(text, source, [&c](const std::string& key, const std::string& value) {
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError("unknown key '" + key + "'");
    it->second->set(c, value);
  });
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

}  // namespace vfpt

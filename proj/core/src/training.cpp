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

#include "vfpt/training.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "text_util.hpp"
#include "vfpt/tracker.hpp"

namespace vfpt {

Partition partition_params(Model& model) {
  Partition p;
  std::set<std::string> names;
  auto add = [&names](std::vector<Param*>& into, Param* q, bool expect_trainable) {
    if (!names.insert(q->name).second) throw AuditError("parameter '" + q->name + "' appears twice");
    if (q->trainable != expect_trainable) {
      throw AuditError("parameter '" + q->name + "' is flagged " + (q->trainable ? "trainable" : "frozen") +
                       " but belongs to the " + (expect_trainable ? "trainable" : "frozen") + " set");
    }
    into.push_back(q);
  };
  for (Param* q : model.encoder.params()) add(p.frozen, q, false);
  for (Param* q : model.prompts.params()) add(p.trainable, q, true);
  for (Param* q : model.mfpg.params()) add(p.trainable, q, true);
  for (Param* q : model.head.params()) add(p.trainable, q, true);
  if (names.size() != model.params().size()) {
    throw AuditError("partition covers " + std::to_string(names.size()) + " of " +
                     std::to_string(model.params().size()) + " parameters");
  }
  return p;
}

std::string frozen_digest(Model& model) {
  std::ostringstream blob;
  for (Param* q : partition_params(model).frozen) {
    write_u32(blob, static_cast<std::uint32_t>(q->name.size()));
    blob << q->name;
    write_tensor(blob, q->value);
  }
  const std::string bytes = blob.str();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

AdamW::AdamW(const OptimConfig& cfg, std::vector<Param*> params) : cfg_(cfg), params_(std::move(params)) {
  for (Param* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

std::size_t AdamW::drop_step() const {
  return static_cast<std::size_t>(std::ceil(cfg_.lr_drop_at * static_cast<double>(cfg_.steps)));
}

double AdamW::lr_at(std::size_t step) const { return step >= drop_step() ? cfg_.lr * cfg_.lr_drop_factor : cfg_.lr; }

void AdamW::step() {
  for (Param* p : params_) {
    const Tensor& g = p->grad;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!std::isfinite(g[k])) {
        throw NumericalError("non-finite gradient " + std::to_string(g[k]) + " in '" + p->name + "' at flat index " +
                             std::to_string(k) + " (step " + std::to_string(t_) + ")");
      }
    }
  }
  const double lr = lr_at(t_);
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& w = params_[i]->value;
    const Tensor& g = params_[i]->grad;
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] *= 1.0 - lr * cfg_.weight_decay;
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void AdamW::restore(std::size_t steps_taken, std::vector<Tensor> m, std::vector<Tensor> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) throw ParseError("optimizer state size mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (m[i].shape() != params_[i]->value.shape() || v[i].shape() != params_[i]->value.shape()) {
      throw ParseError("optimizer moment shape mismatch for '" + params_[i]->name + "'");
    }
  }
  t_ = steps_taken;
  m_ = std::move(m);
  v_ = std::move(v);
}

TrainingSample sample_pair(const std::vector<Sequence>& data, const Config& cfg, Rng& rng) {
  if (data.empty()) throw ConfigError("training data is empty");
  TrainingSample s;
  s.sequence = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(data.size()) - 1));
  const Sequence& seq = data[s.sequence];
  const std::size_t n = seq.frames.size();
  if (n == 0) throw ConfigError("sequence '" + seq.name + "' has no frames");
  if (n >= 2) {
    s.template_frame = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n) - 2));
    const std::size_t max_gap = std::max<std::size_t>(1, std::min(cfg.train.max_gap, n - 1 - s.template_frame));
    s.search_frame = s.template_frame + static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(max_gap)));
  }
  const Frame& zf = seq.frames[s.template_frame];
  const Frame& xf = seq.frames[s.search_frame];
  const CropPair z = crop_pair(zf.rgb, zf.tir, zf.gt.cx(), zf.gt.cy(), zf.gt.context_side(cfg.track.template_factor),
                               cfg.encoder.template_size, ModalityMask::kBoth);
  const double base = std::sqrt(xf.gt.w * xf.gt.h);
  const double jx = rng.uniform(-cfg.train.center_jitter, cfg.train.center_jitter) * base;
  const double jy = rng.uniform(-cfg.train.center_jitter, cfg.train.center_jitter) * base;
  const double scale = 1.0 + rng.uniform(-cfg.train.scale_jitter, cfg.train.scale_jitter);
  const CropPair x = crop_pair(xf.rgb, xf.tir, xf.gt.cx() + jx, xf.gt.cy() + jy,
                               cfg.track.search_factor * base * scale, cfg.encoder.search_size, ModalityMask::kBoth);
  s.inputs = {z.rgb, x.rgb, z.tir, x.tir};
  s.gt = to_normalized(xf.gt, x.info);
  return s;
}

void write_loss_curve(const std::filesystem::path& path, const std::vector<LossRecord>& curve) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "step,total,cls,giou,l1\n";
  for (const LossRecord& r : curve) {
    out << r.step << ',' << detail::fmt_double(r.total) << ',' << detail::fmt_double(r.cls) << ','
        << detail::fmt_double(r.giou) << ',' << detail::fmt_double(r.l1) << '\n';
  }
}

namespace {

constexpr char kCheckpointMagic[4] = {'V', 'F', 'P', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::string read_exact(std::istream& in, std::size_t n, const std::string& source, const char* what) {
  std::string s(n, '\0');
  const auto at = static_cast<long long>(in.tellg());
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw ParseError(source + ": byte " + std::to_string(at) + ": truncated " + what);
  return s;
}

}  // namespace

std::string Checkpoint::serialize() const {
  std::ostringstream out;
  out.write(kCheckpointMagic, 4);
  write_u32(out, kCheckpointVersion);
  const std::string text = config.to_text();
  write_u64(out, text.size());
  out << text;
  write_u64(out, seed);
  write_u64(out, step);
  write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out << name;
    write_tensor(out, t);
  }
  return out.str();
}

Checkpoint Checkpoint::deserialize(const std::string& bytes, const std::string& source) {
  std::istringstream in(bytes);
  Checkpoint c;
  if (read_exact(in, 4, source, "magic") != std::string(kCheckpointMagic, 4)) {
    throw ParseError(source + ": byte 0: not a checkpoint (bad magic)");
  }
  auto offset = [&in]() { return std::to_string(static_cast<long long>(in.tellg())); };
  try {
    const std::uint32_t version = read_u32(in);
    if (version != kCheckpointVersion) throw ParseError("unsupported version " + std::to_string(version));
    const std::uint64_t len = read_u64(in);
    if (len > bytes.size()) throw ParseError("config block length exceeds file size");
    const std::string text = read_exact(in, static_cast<std::size_t>(len), source, "config block");
    try {
      c.config = Config::parse(text, source + ":config");
    } catch (const ConfigError& e) {
      throw ParseError(e.what());
    }
    c.seed = read_u64(in);
    c.step = read_u64(in);
    const std::uint32_t count = read_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t name_len = read_u32(in);
      if (name_len > 4096) throw ParseError("tensor name too long");
      std::string name = read_exact(in, name_len, source, "tensor name");
      c.tensors.emplace_back(std::move(name), read_tensor(in));
    }
  } catch (const ParseError& e) {
    const std::string what = e.what();
    if (what.rfind(source, 0) == 0) throw;
    throw ParseError(source + ": byte " + offset() + ": " + what);
  }
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str(), path.string());
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model m = Model::create(ckpt.config);
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;
  for (Param* p : m.params()) {
    const auto it = by_name.find(p->name);
    if (it == by_name.end()) throw ParseError("checkpoint lacks parameter '" + p->name + "'");
    if (it->second->shape() != p->value.shape()) {
      throw ParseError("checkpoint parameter '" + p->name + "' has shape " + shape_str(it->second->shape()) +
                       ", model expects " + shape_str(p->value.shape()));
    }
    p->value = *it->second;
  }
  for (const auto& [name, t] : ckpt.tensors) {
    if (name.rfind("optim.", 0) != 0 && m.find(name) == nullptr) {
      throw ParseError("checkpoint has unknown parameter '" + name + "'");
    }
  }
  return m;
}

Trainer::Trainer(const Config& cfg, std::vector<Sequence> data)
    : model_(Model::create(cfg)),
      data_(std::move(data)),
      partition_(partition_params(model_)),
      optim_(cfg.optim, partition_.trainable),
      rng_(cfg.seed, "sampling") {
  check_data();
}

Trainer::Trainer(const Checkpoint& ckpt, std::vector<Sequence> data)
    : model_(model_from_checkpoint(ckpt)),
      data_(std::move(data)),
      partition_(partition_params(model_)),
      optim_(model_.config.optim, partition_.trainable),
      rng_(model_.config.seed, "sampling") {
  check_data();
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;
  std::vector<Tensor> m, v;
  for (Param* p : partition_.trainable) {
    const auto im = by_name.find("optim.m." + p->name);
    const auto iv = by_name.find("optim.v." + p->name);
    if (im == by_name.end() || iv == by_name.end()) throw ParseError("checkpoint lacks optimizer state for '" + p->name + "'");
    m.push_back(*im->second);
    v.push_back(*iv->second);
  }
  optim_.restore(ckpt.step, std::move(m), std::move(v));
  // replay the sampling stream so a resumed run draws what an uninterrupted one would
  for (std::uint64_t s = 0; s < ckpt.step; ++s) (void)sample_pair(data_, model_.config, rng_);
}

void Trainer::check_data() const {
  if (data_.empty()) throw ConfigError("training data is empty");
  for (const Sequence& s : data_) {
    if (s.frames.empty()) throw ConfigError("sequence '" + s.name + "' has no frames");
    for (const Frame& f : s.frames) {
      if (f.rgb.rank() != 3 || f.rgb.dim(0) != 3 || f.tir.rank() != 3 || f.tir.dim(0) != 1 ||
          f.tir.dim(1) != f.rgb.dim(1) || f.tir.dim(2) != f.rgb.dim(2)) {
        throw ConfigError("sequence '" + s.name + "' has malformed frames");
      }
      if (!(f.gt.w > 0.0) || !(f.gt.h > 0.0)) throw ConfigError("sequence '" + s.name + "' has an empty gt box");
    }
  }
}

LossRecord Trainer::step() {
  const Config& cfg = model_.config;
  const TrainingSample s = sample_pair(data_, cfg, rng_);
  for (Param* p : partition_.trainable) p->zero_grad();
  Tape tape;
  const ForwardResult f = forward(tape, model_, s.inputs);
  const LossVars loss = total_loss(f.head, s.gt, cfg.loss);
  tape.backward(loss.total);
  LossRecord r;
  r.step = optim_.steps_taken();
  const LossValues v = loss.values();
  r.total = v.total;
  r.cls = v.cls;
  r.giou = v.giou;
  r.l1 = v.l1;
  optim_.step();
  curve_.push_back(r);
  if (cfg.train.log_every > 0 && r.step % cfg.train.log_every == 0) {
    std::clog << "step " << r.step << " total " << r.total << " cls " << r.cls << " giou " << r.giou << " l1 " << r.l1
              << '\n';
  }
  return r;
}

std::vector<LossRecord> Trainer::run() {
  while (optim_.steps_taken() < model_.config.optim.steps) step();
  return curve_;
}

Checkpoint Trainer::checkpoint() {
  Checkpoint c;
  c.config = model_.config;
  c.seed = model_.config.seed;
  c.step = optim_.steps_taken();
  for (Param* p : model_.params()) c.tensors.emplace_back(p->name, p->value);
  for (std::size_t i = 0; i < partition_.trainable.size(); ++i) {
    c.tensors.emplace_back("optim.m." + partition_.trainable[i]->name, optim_.first_moments()[i]);
    c.tensors.emplace_back("optim.v." + partition_.trainable[i]->name, optim_.second_moments()[i]);
  }
  return c;
}

}  // namespace vfpt

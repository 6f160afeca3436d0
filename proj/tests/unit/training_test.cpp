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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "vfpt/errors.hpp"
#include "vfpt/training.hpp"
#include "vfpt/verify/suites.hpp"

using namespace vfpt;
namespace fs = std::filesystem;

namespace {

const std::vector<Sequence>& toy_data() {
  static const std::vector<Sequence> data = {generate(verify::toy_spec(5, 20), "toy")};
  return data;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("vfpt_training_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Partition, EveryParamExactlyOnce) {
  Model m = Model::create(Config::desk());
  const Partition p = partition_params(m);
  std::multiset<std::string> names;
  for (Param* q : p.frozen) {
    EXPECT_FALSE(q->trainable);
    EXPECT_EQ(q->name.rfind("encoder.", 0), 0u) << q->name;
    names.insert(q->name);
  }
  for (Param* q : p.trainable) {
    EXPECT_TRUE(q->trainable);
    names.insert(q->name);
  }
  EXPECT_EQ(names.size(), m.params().size());
  for (const std::string& n : names) EXPECT_EQ(names.count(n), 1u) << n;
}

TEST(Partition, MisflaggedParamFailsAudit) {
  Model m = Model::create(Config::desk());
  m.encoder.blocks[0].qkv_w.trainable = true;
  EXPECT_THROW(partition_params(m), AuditError);
}

TEST(Partition, TrainableCountEqualsModuleBudgets) {
  const Config cfg = Config::desk();
  Model m = Model::create(cfg);
  std::size_t n = 0;
  for (Param* p : partition_params(m).trainable) n += p->size();
  EXPECT_EQ(n, prompt_param_budget(cfg.prompt, cfg.encoder.dim, cfg.encoder.layers) +
                   cfg.encoder.layers * mfpg_layer_budget(cfg.encoder.dim, cfg.mfpg.beta) +
                   head_param_budget(cfg.encoder.dim));
}

TEST(AdamW, ScalarStepMatchesHandComputation) {
  OptimConfig oc;
  oc.lr = 0.01;
  oc.weight_decay = 0.1;
  Param p("w", Tensor::scalar(0.5), true);
  p.grad = Tensor::scalar(0.2);
  AdamW opt(oc, {&p});
  opt.step();
  const double w = 0.5 * (1.0 - 0.01 * 0.1);
  const double m = 0.1 * 0.2, v = 0.001 * 0.04;
  const double mhat = m / (1.0 - 0.9), vhat = v / (1.0 - 0.999);
  EXPECT_NEAR(p.value[0], w - 0.01 * mhat / (std::sqrt(vhat) + 1e-8), 1e-15);
  // second step with a different gradient
  p.grad = Tensor::scalar(-0.3);
  const double w1 = p.value[0];
  opt.step();
  const double m2 = 0.9 * m + 0.1 * -0.3, v2 = 0.999 * v + 0.001 * 0.09;
  const double expect = w1 * (1.0 - 0.001) - 0.01 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(p.value[0], expect, 1e-15);
}

TEST(AdamW, NoDecayAndZeroGradLeavesParams) {
  OptimConfig oc;
  oc.weight_decay = 0.0;
  Param p("w", Tensor({3}, std::vector<double>{1, -2, 3}), true);
  p.grad = Tensor({3});
  AdamW opt(oc, {&p});
  for (int k = 0; k < 5; ++k) opt.step();
  EXPECT_EQ(p.value, Tensor({3}, std::vector<double>{1, -2, 3}));
}

TEST(AdamW, LearningRateDropsAtCeilOfFraction) {
  OptimConfig oc;
  AdamW opt(oc, {});
  EXPECT_EQ(opt.drop_step(), 225u);
  EXPECT_EQ(opt.lr_at(224), 4e-4);
  EXPECT_DOUBLE_EQ(opt.lr_at(225), 4e-5);
  oc.steps = 10;
  AdamW short_run(oc, {});
  EXPECT_EQ(short_run.drop_step(), 8u);
  EXPECT_EQ(short_run.lr_at(7), 4e-4);
  EXPECT_DOUBLE_EQ(short_run.lr_at(8), 4e-5);
}

TEST(AdamW, NonFiniteGradientThrowsBeforeUpdate) {
  Param a("a", Tensor({2}, 1.0), true), b("b", Tensor({2}, 1.0), true);
  a.grad = Tensor({2}, 0.5);
  b.grad = Tensor({2}, std::numeric_limits<double>::quiet_NaN());
  AdamW opt(OptimConfig{}, {&a, &b});
  EXPECT_THROW(opt.step(), NumericalError);
  EXPECT_EQ(a.value, Tensor({2}, 1.0));
  EXPECT_EQ(opt.steps_taken(), 0u);
}

TEST(Sampling, PairsRespectGapAndSequenceBounds) {
  Config cfg = Config::desk();
  cfg.train.max_gap = 3;
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const TrainingSample s = sample_pair(toy_data(), cfg, rng);
    EXPECT_LT(s.template_frame, s.search_frame);
    EXPECT_LE(s.search_frame - s.template_frame, 3u);
    EXPECT_LT(s.search_frame, toy_data()[0].frames.size());
    EXPECT_EQ(s.inputs.rgb_template.shape(), (Shape{3, 32, 32}));
    EXPECT_EQ(s.inputs.tir_search.shape(), (Shape{3, 64, 64}));
    EXPECT_GT(s.gt.cx, 0.0);
    EXPECT_LT(s.gt.cx, 1.0);
  }
}

TEST(Trainer, SameSeedGivesIdenticalCurves) {
  Config cfg = Config::desk();
  cfg.seed = 21;
  Trainer a(cfg, toy_data()), b(cfg, toy_data());
  for (int k = 0; k < 4; ++k) {
    const LossRecord ra = a.step(), rb = b.step();
    EXPECT_EQ(ra.total, rb.total);
    EXPECT_EQ(ra.cls, rb.cls);
  }
}

TEST(Trainer, FrozenDigestInvariant) {
  Trainer t(Config::desk(), toy_data());
  const std::string before = frozen_digest(t.model());
  for (int k = 0; k < 5; ++k) t.step();
  EXPECT_EQ(frozen_digest(t.model()), before);
  EXPECT_EQ(before.size(), 64u);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  const fs::path dir = temp_dir("ckpt");
  Trainer t(Config::desk(), toy_data());
  for (int k = 0; k < 3; ++k) t.step();
  t.checkpoint().save(dir / "a.ckpt");
  Checkpoint::load(dir / "a.ckpt").save(dir / "b.ckpt");
  EXPECT_EQ(slurp(dir / "a.ckpt"), slurp(dir / "b.ckpt"));
  const Checkpoint c = Checkpoint::load(dir / "a.ckpt");
  EXPECT_EQ(c.step, 3u);
  EXPECT_EQ(c.config, Config::desk());
}

TEST(Checkpoint, ResumeMatchesUninterruptedRun) {
  Config cfg = Config::desk();
  cfg.seed = 8;
  Trainer full(cfg, toy_data());
  for (int k = 0; k < 4; ++k) full.step();
  Trainer first(cfg, toy_data());
  for (int k = 0; k < 2; ++k) first.step();
  const Checkpoint mid = Checkpoint::deserialize(first.checkpoint().serialize());
  Trainer resumed(mid, toy_data());
  resumed.step();
  const LossRecord last = resumed.step();
  EXPECT_EQ(last.step, 3u);
  EXPECT_EQ(last.total, full.curve().back().total);
  EXPECT_EQ(resumed.checkpoint().serialize(), full.checkpoint().serialize());
}

TEST(Checkpoint, ModelFromCheckpointRestoresParams) {
  Trainer t(Config::desk(), toy_data());
  t.step();
  Model m = model_from_checkpoint(t.checkpoint());
  const auto a = t.model().params(), b = m.params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value) << a[i]->name;
}

TEST(Checkpoint, CorruptBytesRejected) {
  Trainer t(Config::desk(), toy_data());
  std::string bytes = t.checkpoint().serialize();
  EXPECT_THROW(Checkpoint::deserialize(bytes.substr(0, bytes.size() / 2)), ParseError);
  bytes[0] = 'X';
  EXPECT_THROW(Checkpoint::deserialize(bytes), ParseError);
}

TEST(Trainer, EmptyDataRejected) { EXPECT_THROW(Trainer(Config::desk(), {}), ConfigError); }

TEST(LossCurve, CsvHasOneRowPerStep) {
  const fs::path dir = temp_dir("curve");
  Trainer t(Config::desk(), toy_data());
  for (int k = 0; k < 3; ++k) t.step();
  write_loss_curve(dir / "c.csv", t.curve());
  std::ifstream in(dir / "c.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,total,cls,giou,l1");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

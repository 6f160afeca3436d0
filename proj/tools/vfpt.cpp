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

// vfpt: data generation, training, tracking, evaluation, checks and sweeps.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "vfpt/errors.hpp"
#include "vfpt/experiment.hpp"
#include "vfpt/metrics.hpp"
#include "vfpt/synth.hpp"
#include "vfpt/tracker.hpp"
#include "vfpt/training.hpp"
#include "vfpt/verify/suites.hpp"

namespace fs = std::filesystem;
using namespace vfpt;

namespace {

void echo(const std::string& title, const std::string& text) {
  std::cout << "# " << title << "\n" << text;
  if (!text.empty() && text.back() != '\n') std::cout << '\n';
  std::cout << std::flush;
}

std::vector<ImageBox> ground_truth(const Sequence& seq) {
  std::vector<ImageBox> gts;
  for (const Frame& f : seq.frames) gts.push_back(f.gt);
  return gts;
}

// One sequence: `out` is the file itself. Several: one <name>.txt per sequence under `out`.
fs::path results_path(const fs::path& out, const std::vector<Sequence>& data, const Sequence& seq) {
  return data.size() == 1 ? out : out / (seq.name + ".txt");
}

int gen_data(const std::string& spec_path, const std::string& out) {
  const SyntheticSpec spec = SyntheticSpec::load(spec_path);
  echo("resolved spec", spec.to_text());
  const Sequence seq = generate(spec, fs::path(out).filename().string());
  save_sequence(seq, out);
  std::cout << "wrote " << seq.frames.size() << " frames to " << out << "\n";
  return 0;
}

int train(const std::string& config_path, const std::string& data_dir, const std::string& out, std::string curve,
          std::size_t log_every) {
  Config cfg = Config::load(config_path);
  if (log_every > 0) cfg.train.log_every = log_every;
  echo("resolved config", cfg.to_text());
  Trainer trainer(cfg, load_dataset(data_dir));
  const std::vector<LossRecord> records = trainer.run();
  trainer.checkpoint().save(out);
  if (curve.empty()) curve = out + ".loss.csv";
  write_loss_curve(curve, trainer.curve());
  if (!records.empty()) {
    std::cout << "steps " << trainer.curve().size() << ", loss " << trainer.curve().front().total << " -> "
              << trainer.curve().back().total << "\n";
  }
  std::cout << "checkpoint " << out << ", loss curve " << curve << "\n";
  return 0;
}

int track(const std::string& ckpt_path, const std::string& data_dir, const std::string& out,
          const std::string& dump_dir, const std::string& modality) {
  const Checkpoint ckpt = Checkpoint::load(ckpt_path);
  const ModalityMask mask = parse_modality_mask(modality);
  echo("resolved config", ckpt.config.to_text() + "track.modality = " + to_string(mask) + "\n");
  Model model = model_from_checkpoint(ckpt);
  const std::vector<Sequence> data = load_dataset(data_dir);
  if (data.size() > 1) fs::create_directories(out);
  const std::size_t hs = ckpt.config.encoder.search_grid();
  for (const Sequence& seq : data) {
    fs::path dump;
    if (!dump_dir.empty()) {
      dump = data.size() == 1 ? fs::path(dump_dir) : fs::path(dump_dir) / seq.name;
      fs::create_directories(dump);
      // frame 0 is initialised from the ground truth and has no response
      write_score_map(dump / frame_file(0, "pgm"), Tensor({hs, hs}));
    }
    ScoreSink sink;
    if (!dump.empty()) {
      sink = [&dump](std::size_t t, const Tensor& s) { write_score_map(dump / frame_file(t, "pgm"), s); };
    }
    const std::vector<ImageBox> boxes = track_sequence(seq, model, mask, sink);
    write_results(results_path(out, data, seq), boxes);
    std::cout << seq.name << ": " << boxes.size() << " frames -> " << results_path(out, data, seq).string() << "\n";
  }
  return 0;
}

int eval(const std::string& results, const std::string& data_dir, const std::string& out) {
  const std::vector<Sequence> data = load_dataset(data_dir);
  const std::string header = "results = " + results + "\ndata = " + data_dir + "\n";
  echo("resolved inputs", header);
  std::vector<SequenceReport> reports;
  for (const Sequence& seq : data) {
    reports.push_back(evaluate(read_results(results_path(results, data, seq)), ground_truth(seq), seq.name));
  }
  const EvalReport report = aggregate(std::move(reports));
  write_report(report, out, header);
  std::cout << "SR " << report.overall.sr << "  PR " << report.overall.pr << "  NPR " << report.overall.npr << "\n";
  return 0;
}

int check(const std::string& suite, std::size_t seeds, double twiddle_error) {
  verify::SuiteOptions opt;
  opt.seeds = seeds;
  opt.fft_twiddle_error = twiddle_error;
  const std::vector<verify::CheckResult> results = verify::run_suite(suite, opt);
  std::size_t failed = 0;
  for (const verify::CheckResult& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.suite << ": " << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
    failed += r.passed ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

int sweep(const std::string& axis_name, const std::string& config_path, const std::string& data_dir,
          const std::string& out) {
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const Config cfg = Config::load(config_path);
  echo("resolved config", cfg.to_text() + "sweep.axis = " + to_string(axis) + "\n");
  const std::vector<SweepRow> rows = run_sweep(axis, cfg, load_dataset(data_dir));
  write_sweep_csv(out, rows);
  for (const SweepRow& r : rows) {
    std::cout << to_string(axis) << "=" << r.value << "  SR " << r.sr << "  PR " << r.pr << "  NPR " << r.npr << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RGB-T tracking with visual Fourier prompts"};
  app.require_subcommand(1);

  std::string spec, config, data, out, ckpt, results, dump, modality = "both", suite, axis, curve;
  std::size_t seeds = 20, log_every = 0;
  double twiddle_error = 0.0;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic RGB/TIR sequence");
  gen->add_option("--spec", spec, "Sequence spec file")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train prompts, MFPG and head on a dataset");
  tr->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  tr->add_option("--data", data, "Sequence directory or directory of sequences")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", out, "Checkpoint path")->required();
  tr->add_option("--loss-curve", curve, "Loss curve CSV (default: <out>.loss.csv)");
  tr->add_option("--log-every", log_every, "Log every N steps to stderr");

  auto* tk = app.add_subcommand("track", "Track every sequence of a dataset");
  tk->add_option("--ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  tk->add_option("--data", data, "Sequence directory or directory of sequences")->required()->check(CLI::ExistingDirectory);
  tk->add_option("--out", out, "Results file (or directory for several sequences)")->required();
  tk->add_option("--dump-scores", dump, "Write one penalised score map (PGM) per frame here");
  tk->add_option("--modality", modality, "both, rgb or tir")->check(CLI::IsMember({"both", "rgb", "tir"}));

  auto* ev = app.add_subcommand("eval", "Score tracking results against ground truth");
  ev->add_option("--results", results, "Results file (or directory)")->required()->check(CLI::ExistingPath);
  ev->add_option("--data", data, "Sequence directory or directory of sequences")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--out", out, "Report path")->required();

  auto* ck = app.add_subcommand("check", "Run oracle suites");
  ck->add_option("--suite", suite, "fft, grad, freeze, mfpg, metrics or all")
      ->required()
      ->check(CLI::IsMember({"fft", "grad", "freeze", "mfpg", "metrics", "all"}));
  ck->add_option("--seeds", seeds, "Seeds for the gradient suite")->check(CLI::PositiveNumber);
  ck->add_option("--fft-twiddle-error", twiddle_error)->group("");

  auto* sw = app.add_subcommand("sweep", "Ablation sweep: train and evaluate per grid point");
  sw->add_option("--axis", axis, "alpha, mfpg-layers, prompt-layers or fft-mode")
      ->required()
      ->check(CLI::IsMember({"alpha", "mfpg-layers", "prompt-layers", "fft-mode"}));
  sw->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--data", data, "Sequence directory or directory of sequences")->required()->check(CLI::ExistingDirectory);
  sw->add_option("--out", out, "CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_data(spec, out);
    if (*tr) return train(config, data, out, curve, log_every);
    if (*tk) return track(ckpt, data, out, dump, modality);
    if (*ev) return eval(results, data, out);
    if (*ck) return check(suite, seeds, twiddle_error);
    if (*sw) return sweep(axis, config, data, out);
  } catch (const vfpt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

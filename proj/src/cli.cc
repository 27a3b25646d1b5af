// src/cli.cc

// Copyright 2026 The lidnet Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lid/cli.h"

#include <CLI11.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <thread>

#include "lid/data.h"
#include "lid/train.h"

namespace fs = std::filesystem;

namespace lid {

namespace {

LidModel BuildModel(const RunConfig& cfg, const LabelSet& labels) {
  EncoderConfig ecfg = cfg.model;
  ecfg.in_dim = cfg.features.n_mels;
  Rng init_rng(cfg.train.seed);
  return LidModel(ecfg, cfg.attention_dim, labels.Size(), init_rng);
}

bool LooksLikeLidf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {0};
  in.read(magic, 4);
  return in && std::strncmp(magic, "LIDF", 4) == 0;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

}  // namespace

int CmdExtract(const RunConfig& cfg, const std::string& manifest_path,
               const std::string& out_dir, std::ostream& log) {
  cfg.Validate();
  const LabelSet labels = LabelSet::Default16();
  const auto entries = LoadManifest(manifest_path, labels);
  fs::create_directories(out_dir);

  std::vector<ManifestEntry> out_entries(entries.size());
  std::vector<uint8_t> ok(entries.size(), 0);
  std::mutex log_mutex;

  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const auto& e = entries[i];
      try {
        Tensor frames;
        if (LooksLikeLidf(e.path)) {
          frames = ReadLidf(e.path);
        } else {
          frames = ComputeMfsc(ReadWav(e.path), cfg.features).frames;
        }
        const std::string out_path =
            (fs::path(out_dir) / (fs::path(e.path).stem().string() + ".lidf")).string();
        WriteLidf(out_path, frames);
        out_entries[i] = ManifestEntry{out_path, e.label, e.label_index};
        ok[i] = 1;
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "extract: failed for " << e.path << ": " << ex.what() << "\n";
      }
    }
  };

  const int workers = std::max(1, cfg.train.workers);
  if (workers == 1 || entries.size() < 2) {
    work(0, entries.size());
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (entries.size() + workers - 1) / static_cast<size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const size_t begin = static_cast<size_t>(w) * chunk;
      const size_t end = std::min(entries.size(), begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  std::vector<ManifestEntry> succeeded;
  int failures = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (ok[i])
      succeeded.push_back(out_entries[i]);
    else
      ++failures;
  }
  WriteManifest((fs::path(out_dir) / "manifest.tsv").string(), succeeded);
  log << "extract: wrote " << succeeded.size() << " feature files to " << out_dir
      << " (" << failures << " failures)\n";
  return failures;
}

void CmdTrain(const RunConfig& cfg, const std::string& out_path, std::ostream& log) {
  cfg.Validate();
  if (cfg.train_manifest.empty() || cfg.val_manifest.empty())
    throw ConfigError("train: data.train_manifest and data.val_manifest are required");
  const LabelSet labels = LabelSet::Default16();
  const Dataset train_set = LoadDataset(LoadManifest(cfg.train_manifest, labels), cfg.features);
  const Dataset val_set = LoadDataset(LoadManifest(cfg.val_manifest, labels), cfg.features);

  LidModel model = BuildModel(cfg, labels);
  const std::string snapshot = cfg.Serialize();
  const TrainResult result = TrainLoop(model, train_set, val_set, cfg.train,
                                       cfg.augment, snapshot);

  if (const fs::path parent = fs::path(out_path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  CheckpointSave(result.best, out_path);
  WriteText(out_path + ".config", snapshot);

  std::ofstream hist(out_path + ".history.csv");
  if (!hist) throw DataError("train: cannot write " + out_path + ".history.csv");
  hist << "step,lr,train_loss,epoch,val_loss\n";
  for (const auto& row : result.history) {
    hist << row.step << "," << std::fixed << std::setprecision(4) << row.lr << ","
         << std::setprecision(6) << row.train_loss << "," << row.epoch << ",";
    if (std::isfinite(row.val_loss)) hist << std::setprecision(6) << row.val_loss;
    hist << "\n";
  }
  log << "train: " << result.epochs_run << " epochs, best validation loss "
      << result.best_val_loss << ", checkpoint " << out_path << "\n";
}

void CmdEval(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& manifest_path, const std::string& report_dir,
             std::ostream& log) {
  cfg.Validate();
  const LabelSet labels = LabelSet::Default16();
  LidModel model = BuildModel(cfg, labels);
  ApplyCheckpoint(model, CheckpointLoad(checkpoint_path));

  const Dataset dataset = LoadDataset(LoadManifest(manifest_path, labels), cfg.features);
  const EvalResult eval = EvaluateModel(model, dataset);

  std::vector<std::pair<int, int>> pairs;
  for (size_t i = 0; i < dataset.size(); ++i)
    pairs.emplace_back(dataset[i].label, eval.predictions[i]);
  const ConfusionMatrix confusion = BuildConfusion(pairs, labels);
  const Report report = AggregateReport(ComputeClassMetrics(confusion, labels), confusion);

  fs::create_directories(report_dir);
  WriteMetricsCsv((fs::path(report_dir) / "metrics.csv").string(), report);
  WriteConfusionCsv((fs::path(report_dir) / "confusion.csv").string(), confusion, labels);
  WriteText((fs::path(report_dir) / "confusion.txt").string(),
            RenderConfusionGrid(confusion, labels));
  log << "eval: " << dataset.size() << " utterances, accuracy " << report.accuracy
      << ", mean loss " << eval.mean_loss << ", reports in " << report_dir << "\n";
}

void CmdPredict(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& input_path, std::ostream& out) {
  cfg.Validate();
  const LabelSet labels = LabelSet::Default16();
  LidModel model = BuildModel(cfg, labels);
  if (!checkpoint_path.empty())
    ApplyCheckpoint(model, CheckpointLoad(checkpoint_path));

  FeatureSequence features;
  if (LooksLikeLidf(input_path)) {
    features = FeatureSequence::FromFrames(ReadLidf(input_path));
  } else {
    features = ComputeMfsc(ReadWav(input_path), cfg.features);
  }

  Rng unused(0);
  Tensor batch({1, features.frames.shape[0], features.frames.shape[1]});
  for (int64_t f = 0; f < features.frames.shape[0]; ++f)
    for (int64_t c = 0; c < features.frames.shape[1]; ++c)
      batch.At(0, f, c) = features.frames.At(f, c);
  Var logits = model.Forward(Var(batch), {features.valid}, Mode::kEval, unused);
  Var probs = SoftmaxRows(logits);

  int best = 0;
  for (int j = 1; j < labels.Size(); ++j)
    if (probs.Value().At(0, j) > probs.Value().At(0, best)) best = j;
  out << labels.Code(best) << "\n";
  for (int j = 0; j < labels.Size(); ++j)
    out << labels.Code(j) << " " << std::fixed << std::setprecision(6)
        << probs.Value().At(0, j) << "\n";
}

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Spoken language identification: feature extraction, training, "
               "evaluation and inference"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int64_t seed = -1;
  int workers = 0;
  app.add_option("--config", config_path, "Config file (key=value lines)");
  app.add_option("--set", overrides, "Config overrides, key=value (repeatable)");
  app.add_option("--seed", seed, "Override train.seed");
  app.add_option("--workers", workers, "Override train.workers");

  auto* extract = app.add_subcommand("extract", "Extract LIDF feature files");
  std::string manifest_path, out_dir;
  extract->add_option("--manifest", manifest_path, "Input manifest")->required();
  extract->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model");
  std::string out_path;
  train->add_option("--out", out_path, "Checkpoint output path")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string checkpoint_path, eval_manifest, report_dir;
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint path")->required();
  eval->add_option("--manifest", eval_manifest, "Evaluation manifest")->required();
  eval->add_option("--report-dir", report_dir, "Report output directory")->required();

  auto* predict = app.add_subcommand("predict", "Classify one WAV or LIDF file");
  std::string predict_checkpoint, input_path;
  predict->add_option("--checkpoint", predict_checkpoint, "Checkpoint path");
  predict->add_option("input", input_path, "WAV or LIDF file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg.LoadFile(config_path);
    cfg.ApplyOverrides(overrides);
    if (seed >= 0) cfg.train.seed = static_cast<uint64_t>(seed);
    if (workers > 0) cfg.train.workers = workers;

    if (extract->parsed()) {
      return CmdExtract(cfg, manifest_path, out_dir, std::cerr) == 0 ? 0 : 2;
    }
    if (train->parsed()) {
      CmdTrain(cfg, out_path, std::cerr);
      return 0;
    }
    if (eval->parsed()) {
      CmdEval(cfg, checkpoint_path, eval_manifest, report_dir, std::cerr);
      return 0;
    }
    if (predict->parsed()) {
      CmdPredict(cfg, predict_checkpoint, input_path, std::cout);
      return 0;
    }
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lid

// tests/test_cli.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lid/cli.h"
#include "lid/features.h"
#include "lid/rng.h"
#include "lid/train.h"

using namespace lid;
namespace fs = std::filesystem;

namespace {

fs::path WorkDir() {
  const fs::path dir = fs::temp_directory_path() / "lid_cli_test";
  fs::create_directories(dir);
  return dir;
}

int Run(std::vector<std::string> args) {
  std::vector<const char*> argv = {"lid"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

void WriteToneWav(const std::string& path, double freq, double seconds = 1.0) {
  AudioClip clip;
  const int n = static_cast<int>(seconds * 16000);
  clip.samples.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    clip.samples.push_back(
        0.4f * static_cast<float>(std::sin(2.0 * 3.14159265358979 * freq * i / 16000.0)));
  WriteWav(path, clip);
}

void WriteRandomLidf(const std::string& path, int64_t t, uint64_t seed) {
  Rng rng(seed);
  Tensor frames({t, 40});
  for (auto& v : frames.data) v = static_cast<float>(rng.UniformRange(-2, 2));
  WriteLidf(path, frames);
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::string ReadBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Small-architecture overrides shared by the training-path tests.
std::vector<std::string> TinyOverrides() {
  return {"--set", "model.blocks=1",        "--set", "model.subblocks=1",
          "--set", "model.channels=8",      "--set", "model.kernel_schedule=3",
          "--set", "model.attention_dim=4",       "--set", "train.batch_size=4",
          "--set", "train.max_epochs=1"};
}

// Eight short random feature files over four labels, with a manifest.
std::string MakeLidfManifest(const fs::path& dir, const std::string& name, uint64_t seed) {
  const char* codes[] = {"kab", "eng", "tam", "tha"};
  std::ostringstream manifest;
  for (int i = 0; i < 8; ++i) {
    const std::string path = (dir / (name + std::to_string(i) + ".lidf")).string();
    WriteRandomLidf(path, 12 + 2 * (i % 3), seed + static_cast<uint64_t>(i));
    manifest << path << "\t" << codes[i % 4] << "\n";
  }
  const std::string mpath = (dir / (name + ".tsv")).string();
  WriteText(mpath, manifest.str());
  return mpath;
}

}  // namespace

TEST_CASE("extract produces feature files and a new manifest") {
  const fs::path dir = WorkDir() / "extract";
  fs::create_directories(dir);
  const std::string wav = (dir / "tone.wav").string();
  WriteToneWav(wav, 440.0);
  WriteText((dir / "in.tsv").string(), wav + "\tkab\n");
  const std::string out_dir = (dir / "feats").string();

  CHECK(Run({"extract", "--manifest", (dir / "in.tsv").string(), "--out-dir", out_dir}) == 0);

  Tensor frames = ReadLidf((fs::path(out_dir) / "tone.lidf").string());
  CHECK(frames.shape == std::vector<int64_t>({98, 40}));  // 1s at 25ms/10ms
  auto lines = ReadLines((fs::path(out_dir) / "manifest.tsv").string());
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].find("tone.lidf\tkab") != std::string::npos);
}

TEST_CASE("extract with an empty manifest succeeds and writes nothing") {
  const fs::path dir = WorkDir() / "extract_empty";
  fs::create_directories(dir);
  WriteText((dir / "in.tsv").string(), "# nothing here\n");
  CHECK(Run({"extract", "--manifest", (dir / "in.tsv").string(), "--out-dir",
             (dir / "out").string()}) == 0);
  CHECK(ReadLines((dir / "out" / "manifest.tsv").string()).empty());
}

TEST_CASE("extract reports unreadable inputs by path") {
  const fs::path dir = WorkDir() / "extract_bad";
  fs::create_directories(dir);
  WriteText((dir / "in.tsv").string(), (dir / "missing.wav").string() + "\teng\n");
  RunConfig cfg;
  std::ostringstream log;
  const int failures = CmdExtract(cfg, (dir / "in.tsv").string(), (dir / "out").string(), log);
  CHECK(failures == 1);
  CHECK(log.str().find("missing.wav") != std::string::npos);
  // Exit code 2 through the CLI surface.
  CHECK(Run({"extract", "--manifest", (dir / "in.tsv").string(), "--out-dir",
             (dir / "out").string()}) == 2);
}

TEST_CASE("train writes a checkpoint, config snapshot and history") {
  const fs::path dir = WorkDir() / "train";
  fs::create_directories(dir);
  const std::string train_m = MakeLidfManifest(dir, "tr", 100);
  const std::string val_m = MakeLidfManifest(dir, "va", 200);
  const std::string ckpt = (dir / "model.lidc").string();

  auto args = TinyOverrides();
  args.insert(args.end(), {"--seed", "7", "train", "--out", ckpt});
  args.insert(args.begin() + 0, {"--set", "data.train_manifest=" + train_m});
  args.insert(args.begin() + 2, {"--set", "data.val_manifest=" + val_m});
  CHECK(Run(args) == 0);

  CHECK(fs::exists(ckpt));
  CHECK_NOTHROW(CheckpointLoad(ckpt));

  auto history = ReadLines(ckpt + ".history.csv");
  REQUIRE(history.size() >= 3);  // header + 2 steps (8 utterances / batch 4)
  CHECK(history[0] == "step,lr,train_loss,epoch,val_loss");
  CHECK(history[1].rfind("0,0.0050,", 0) == 0);  // initial lr
  CHECK(history.back().back() != ',');           // epoch end carries val loss

  // The stored config snapshot re-parses to the same configuration.
  RunConfig snap;
  snap.LoadFile(ckpt + ".config");
  CHECK(snap.model.blocks == 1);
  CHECK(snap.model.channels == 8);
  CHECK(snap.train.seed == 7);
  CHECK(snap.train_manifest == train_m);
}

TEST_CASE("training twice with one seed is reproducible through the CLI") {
  const fs::path dir = WorkDir() / "train_det";
  fs::create_directories(dir);
  const std::string train_m = MakeLidfManifest(dir, "tr", 300);
  const std::string val_m = MakeLidfManifest(dir, "va", 400);

  auto base = TinyOverrides();
  base.insert(base.end(), {"--set", "data.train_manifest=" + train_m, "--set",
                           "data.val_manifest=" + val_m, "--seed", "5"});
  auto a = base, b = base;
  const std::string c1 = (dir / "a.lidc").string(), c2 = (dir / "b.lidc").string();
  a.insert(a.end(), {"train", "--out", c1});
  b.insert(b.end(), {"train", "--out", c2});
  REQUIRE(Run(a) == 0);
  REQUIRE(Run(b) == 0);
  CHECK(ReadBytes(c1) == ReadBytes(c2));
  CHECK(ReadBytes(c1 + ".history.csv") == ReadBytes(c2 + ".history.csv"));
}

TEST_CASE("eval writes the three report files with consistent counts") {
  const fs::path dir = WorkDir() / "eval";
  fs::create_directories(dir);
  const std::string train_m = MakeLidfManifest(dir, "tr", 500);
  const std::string val_m = MakeLidfManifest(dir, "va", 600);
  const std::string ckpt = (dir / "model.lidc").string();

  auto args = TinyOverrides();
  args.insert(args.end(), {"--set", "data.train_manifest=" + train_m, "--set",
                           "data.val_manifest=" + val_m, "train", "--out", ckpt});
  REQUIRE(Run(args) == 0);

  const std::string report = (dir / "report").string();
  auto eval_args = TinyOverrides();
  eval_args.insert(eval_args.end(), {"eval", "--checkpoint", ckpt, "--manifest", val_m,
                                     "--report-dir", report});
  CHECK(Run(eval_args) == 0);

  auto metrics = ReadLines((fs::path(report) / "metrics.csv").string());
  REQUIRE(metrics.size() == 21);  // header + 16 classes + 4 aggregates
  CHECK(metrics[0] == "language,support,precision,recall,f1");
  // Supports sum to the number of evaluated utterances.
  int64_t support = 0;
  for (int i = 1; i <= 16; ++i) {
    std::istringstream row(metrics[static_cast<size_t>(i)]);
    std::string code, s;
    std::getline(row, code, ',');
    std::getline(row, s, ',');
    support += std::stoll(s);
  }
  CHECK(support == 8);

  auto confusion = ReadLines((fs::path(report) / "confusion.csv").string());
  REQUIRE(confusion.size() == 17);
  CHECK(confusion[0].rfind("true\\predicted,kab,", 0) == 0);
  CHECK(fs::exists(fs::path(report) / "confusion.txt"));

  // Wrong architecture for the checkpoint is a reported error, not a crash.
  std::vector<std::string> wrong = {"--set", "model.blocks=1", "--set",
                                    "model.subblocks=1", "--set", "model.channels=16",
                                    "--set", "model.kernel_schedule=3", "eval",
                                    "--checkpoint", ckpt, "--manifest", val_m,
                                    "--report-dir", report};
  CHECK(Run(wrong) != 0);
}

TEST_CASE("predict prints a code and a 16-way distribution") {
  const fs::path dir = WorkDir() / "predict";
  fs::create_directories(dir);
  const std::string lidf = (dir / "x.lidf").string();
  WriteRandomLidf(lidf, 30, 900);

  RunConfig cfg;
  cfg.model.blocks = 1;
  cfg.model.subblocks = 1;
  cfg.model.channels = 8;
  cfg.model.kernel_schedule = {3};
  cfg.attention_dim = 4;
  std::ostringstream out;
  CmdPredict(cfg, "", lidf, out);

  std::istringstream lines(out.str());
  std::string best;
  std::getline(lines, best);
  const LabelSet labels = LabelSet::Default16();
  CHECK(labels.IndexOf(best) >= 0);
  double sum = 0, best_prob = -1;
  std::string top_code;
  for (int i = 0; i < 16; ++i) {
    std::string code;
    double p = -1;
    lines >> code >> p;
    CHECK(labels.IndexOf(code) == i);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    sum += p;
    if (p > best_prob) {
      best_prob = p;
      top_code = code;
    }
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(top_code == best);
}

TEST_CASE("predict agrees between a wav and its extracted features") {
  const fs::path dir = WorkDir() / "predict_eq";
  fs::create_directories(dir);
  const std::string wav = (dir / "tone.wav").string();
  WriteToneWav(wav, 300.0, 0.5);

  RunConfig cfg;
  cfg.model.blocks = 1;
  cfg.model.subblocks = 1;
  cfg.model.channels = 8;
  cfg.model.kernel_schedule = {3};
  cfg.attention_dim = 4;

  const std::string lidf = (dir / "tone.lidf").string();
  WriteLidf(lidf, ComputeMfsc(ReadWav(wav), cfg.features).frames);

  std::ostringstream from_wav, from_lidf;
  CmdPredict(cfg, "", wav, from_wav);
  CmdPredict(cfg, "", lidf, from_lidf);
  CHECK(from_wav.str() == from_lidf.str());
}

TEST_CASE("an untrained default model is near-uniform on silence") {
  const fs::path dir = WorkDir() / "predict_silence";
  fs::create_directories(dir);
  const std::string wav = (dir / "silence.wav").string();
  AudioClip clip;
  clip.samples.assign(16000, 0.0f);
  WriteWav(wav, clip);

  RunConfig cfg;  // full default architecture
  std::ostringstream out;
  CmdPredict(cfg, "", wav, out);
  std::istringstream lines(out.str());
  std::string skip;
  std::getline(lines, skip);
  for (int i = 0; i < 16; ++i) {
    std::string code;
    double p = -1;
    lines >> code >> p;
    CHECK(std::abs(p - 1.0 / 16) < 0.05);
  }
}

TEST_CASE("config files round trip and unknown keys are rejected") {
  const fs::path dir = WorkDir() / "config";
  fs::create_directories(dir);

  RunConfig cfg;
  cfg.model.channels = 64;
  cfg.train.seed = 42;
  cfg.augment.enabled = true;
  const std::string path = (dir / "run.conf").string();
  WriteText(path, cfg.Serialize());
  RunConfig back;
  back.LoadFile(path);
  CHECK(back.Serialize() == cfg.Serialize());
  CHECK(back.model.channels == 64);
  CHECK(back.train.seed == 42);
  CHECK(back.augment.enabled);

  WriteText(path, "model.channles=64\n");  // typo
  RunConfig bad;
  CHECK_THROWS_AS(bad.LoadFile(path), ConfigError);

  // Unknown key through the CLI maps to the config exit code.
  CHECK(Run({"--set", "no.such.key=1", "predict", "whatever.wav"}) == 1);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = WorkDir() / "exit";
  fs::create_directories(dir);
  // Missing manifest file: data error.
  CHECK(Run({"extract", "--manifest", (dir / "nope.tsv").string(), "--out-dir",
             (dir / "out").string()}) == 2);
  // Missing required flag: usage error.
  CHECK(Run({"extract"}) == 1);
  // Unknown subcommand.
  CHECK(Run({"frobnicate"}) == 1);
  // Config contradiction.
  CHECK(Run({"--set", "train.batch_size=0", "train", "--out", (dir / "x.lidc").string()}) == 1);
}

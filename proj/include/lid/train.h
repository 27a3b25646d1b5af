// lid/train.h

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

#ifndef LID_TRAIN_H_
#define LID_TRAIN_H_

#include <map>
#include <string>
#include <vector>

#include "lid/augment.h"
#include "lid/config.h"
#include "lid/data.h"
#include "lid/features.h"
#include "lid/model.h"

namespace lid {

struct Utterance {
  FeatureSequence features;
  int label = -1;
  std::string source;
};

using Dataset = std::vector<Utterance>;

// Reads every manifest entry; WAV and LIDF sources are distinguished by
// file magic, so pre-extracted features mix freely with raw audio.
Dataset LoadDataset(const std::vector<ManifestEntry>& entries, const FeatureConfig& cfg);

// Half-cosine decay from lr_init to lr_min over total_steps, clamped beyond.
double CosineLr(int64_t step, const TrainConfig& cfg);

using GradMap = std::map<std::string, Tensor>;

// Gradients by parameter name; parameters never touched by the loss get
// explicit zeros.
GradMap CollectGrads(const std::vector<ParameterT<float>>& params);

// p <- p - lr * g for trainable parameters. Missing gradient is a contract
// error; non-trainable parameters are left untouched.
void SgdStep(std::vector<ParameterT<float>>& params, const GradMap& grads, double lr);

struct Checkpoint {
  std::vector<std::pair<std::string, Tensor>> params;
  uint64_t step = 0;
  std::string config_snapshot;  // key=value lines; carries rng/best-loss state
};

// "LIDC" file: u32 version=1, u32 param count; per parameter u16 name length,
// name, u8 rank, rank x u32 dims, float32 payload; footer u64 step and a
// u32-length-prefixed config snapshot. All integers little-endian.
void CheckpointSave(const Checkpoint& ckpt, const std::string& path);
Checkpoint CheckpointLoad(const std::string& path);

Checkpoint SnapshotModel(const LidModel& model, uint64_t step, const std::string& snapshot);

// Copies checkpoint tensors into the model; shape mismatches and missing
// parameters raise errors naming the parameter.
void ApplyCheckpoint(LidModel& model, const Checkpoint& ckpt);

struct HistoryRow {
  int64_t step = 0;
  double lr = 0;
  double train_loss = 0;
  int epoch = 0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();  // set on epoch ends
};

struct EvalResult {
  double mean_loss = 0;
  std::vector<int> predictions;
};

// Deterministic eval-mode pass: per-utterance argmax and mean cross-entropy.
EvalResult EvaluateModel(LidModel& model, const Dataset& dataset);

struct TrainResult {
  std::vector<HistoryRow> history;
  Checkpoint best;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int epochs_run = 0;
};

// Shuffled mini-batch SGD with cosine-annealed lr, per-epoch validation and
// patience-based early stopping on validation loss.
TrainResult TrainLoop(LidModel& model, const Dataset& train_set, const Dataset& val_set,
                      const TrainConfig& cfg, const AugmentConfig& augment,
                      const std::string& config_snapshot = "");

// Pads utterances to the longest in the batch; valid flags mark real frames.
void MakeBatch(const Dataset& data, const std::vector<size_t>& indices,
               Tensor* batch, std::vector<std::vector<uint8_t>>* valid,
               std::vector<int>* labels);

}  // namespace lid

#endif  // LID_TRAIN_H_

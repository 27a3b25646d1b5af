// src/train.cc

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

#include "lid/train.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace lid {

namespace {

constexpr double kPi = 3.14159265358979323846;

void WriteU16(std::ostream& out, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 2);
}

void WriteU32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<char*>(b), 4);
}

void WriteU64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<char*>(b), 8);
}

uint16_t ReadU16(std::istream& in, const std::string& where) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw DataError("checkpoint: truncated " + where);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t ReadU32(std::istream& in, const std::string& where) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("checkpoint: truncated " + where);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t ReadU64(std::istream& in, const std::string& where) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw DataError("checkpoint: truncated " + where);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

bool LooksLikeLidf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {0};
  in.read(magic, 4);
  return in && std::strncmp(magic, "LIDF", 4) == 0;
}

}  // namespace

Dataset LoadDataset(const std::vector<ManifestEntry>& entries, const FeatureConfig& cfg) {
  Dataset data;
  data.reserve(entries.size());
  for (const auto& e : entries) {
    Utterance u;
    u.label = e.label_index;
    u.source = e.path;
    if (LooksLikeLidf(e.path)) {
      u.features = FeatureSequence::FromFrames(ReadLidf(e.path));
      if (u.features.frames.shape[1] != cfg.n_mels)
        throw DataError("dataset: " + e.path + " has " +
                        std::to_string(u.features.frames.shape[1]) +
                        " coefficients, expected " + std::to_string(cfg.n_mels));
    } else {
      u.features = ComputeMfsc(ReadWav(e.path), cfg);
    }
    data.push_back(std::move(u));
  }
  return data;
}

double CosineLr(int64_t step, const TrainConfig& cfg) {
  if (cfg.total_steps < 1) throw ConfigError("cosine_lr: total_steps must be >= 1");
  const double s = static_cast<double>(std::min(step, cfg.total_steps));
  const double t = static_cast<double>(cfg.total_steps);
  return cfg.lr_min + (cfg.lr_init - cfg.lr_min) * 0.5 * (1.0 + std::cos(kPi * s / t));
}

GradMap CollectGrads(const std::vector<ParameterT<float>>& params) {
  GradMap grads;
  for (const auto& p : params) {
    if (!p.trainable) continue;
    grads[p.name] = p.node.Grad();  // materializes zeros when untouched
  }
  return grads;
}

void SgdStep(std::vector<ParameterT<float>>& params, const GradMap& grads, double lr) {
  for (auto& p : params) {
    if (!p.trainable) continue;
    const auto it = grads.find(p.name);
    if (it == grads.end())
      throw DimensionError("sgd_step: missing gradient for trainable parameter " + p.name);
    auto& value = p.node.MutableValue();
    const Tensor& g = it->second;
    if (!value.SameShape(g))
      throw DimensionError("sgd_step: gradient shape mismatch for " + p.name);
    for (int64_t i = 0; i < value.Numel(); ++i)
      value.At(i) -= static_cast<float>(lr * g.At(i));
  }
}

void CheckpointSave(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot write " + path);
  out.write("LIDC", 4);
  WriteU32(out, 1);
  WriteU32(out, static_cast<uint32_t>(ckpt.params.size()));
  for (const auto& [name, tensor] : ckpt.params) {
    WriteU16(out, static_cast<uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.put(static_cast<char>(tensor.Rank()));
    for (int64_t d : tensor.shape) WriteU32(out, static_cast<uint32_t>(d));
    for (float v : tensor.data) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      WriteU32(out, bits);
    }
  }
  WriteU64(out, ckpt.step);
  WriteU32(out, static_cast<uint32_t>(ckpt.config_snapshot.size()));
  out.write(ckpt.config_snapshot.data(),
            static_cast<std::streamsize>(ckpt.config_snapshot.size()));
}

Checkpoint CheckpointLoad(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  char magic[4] = {0};
  in.read(magic, 4);
  if (!in || std::strncmp(magic, "LIDC", 4) != 0)
    throw DataError("checkpoint: bad magic in " + path);
  const uint32_t version = ReadU32(in, "version");
  if (version != 1)
    throw DataError("checkpoint: unsupported version " + std::to_string(version) +
                    " in " + path);
  const uint32_t count = ReadU32(in, "parameter count");
  Checkpoint ckpt;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = ReadU16(in, "parameter name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("checkpoint: truncated parameter name");
    const int rank = in.get();
    if (rank < 1 || rank > 8)
      throw DataError("checkpoint: bad rank for parameter " + name);
    std::vector<int64_t> shape;
    for (int d = 0; d < rank; ++d)
      shape.push_back(static_cast<int64_t>(ReadU32(in, "dims of " + name)));
    Tensor t(shape);
    for (auto& v : t.data) {
      const uint32_t bits = ReadU32(in, "payload of " + name);
      std::memcpy(&v, &bits, 4);
    }
    ckpt.params.emplace_back(std::move(name), std::move(t));
  }
  ckpt.step = ReadU64(in, "step counter");
  const uint32_t snap_len = ReadU32(in, "config snapshot length");
  ckpt.config_snapshot.resize(snap_len);
  in.read(ckpt.config_snapshot.data(), snap_len);
  if (!in) throw DataError("checkpoint: truncated config snapshot in " + path);
  return ckpt;
}

Checkpoint SnapshotModel(const LidModel& model, uint64_t step, const std::string& snapshot) {
  Checkpoint ckpt;
  ckpt.step = step;
  ckpt.config_snapshot = snapshot;
  for (const auto& p : model.Params()) ckpt.params.emplace_back(p.name, p.node.Value());
  return ckpt;
}

void ApplyCheckpoint(LidModel& model, const Checkpoint& ckpt) {
  for (const auto& [name, tensor] : ckpt.params) {
    ParameterT<float>* p = model.FindParam(name);
    if (!p)
      throw DimensionError("checkpoint: parameter " + name +
                           " does not exist in the configured architecture");
    if (!p->node.Value().SameShape(tensor))
      throw DimensionError("checkpoint: shape mismatch for " + name + ": file has " +
                           tensor.ShapeStr() + ", model has " +
                           p->node.Value().ShapeStr());
    p->node.MutableValue() = tensor;
  }
  // Every model parameter must be covered.
  for (const auto& p : model.Params()) {
    bool found = false;
    for (const auto& [name, tensor] : ckpt.params) found = found || name == p.name;
    if (!found)
      throw DimensionError("checkpoint: missing parameter " + p.name);
  }
}

void MakeBatch(const Dataset& data, const std::vector<size_t>& indices,
               Tensor* batch, std::vector<std::vector<uint8_t>>* valid,
               std::vector<int>* labels) {
  if (indices.empty()) throw DataError("batch: empty index list");
  int64_t max_t = 1;
  const int64_t dim = data[indices[0]].features.frames.shape[1];
  for (size_t idx : indices)
    max_t = std::max(max_t, data[idx].features.frames.shape[0]);
  const int64_t n = static_cast<int64_t>(indices.size());
  *batch = Tensor({n, max_t, dim});
  valid->assign(static_cast<size_t>(n), {});
  labels->clear();
  for (int64_t i = 0; i < n; ++i) {
    const Utterance& u = data[indices[static_cast<size_t>(i)]];
    const int64_t t = u.features.frames.shape[0];
    for (int64_t f = 0; f < t; ++f)
      for (int64_t c = 0; c < dim; ++c)
        batch->At(i, f, c) = u.features.frames.At(f, c);
    auto& mask = (*valid)[static_cast<size_t>(i)];
    mask.assign(static_cast<size_t>(max_t), 0);
    for (int64_t f = 0; f < t; ++f)
      mask[static_cast<size_t>(f)] = u.features.valid[static_cast<size_t>(f)];
    labels->push_back(u.label);
  }
}

EvalResult EvaluateModel(LidModel& model, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("evaluate: empty dataset");
  Rng unused(0);  // eval mode draws nothing
  EvalResult result;
  double total = 0;
  for (const auto& u : dataset) {
    Tensor batch({1, u.features.frames.shape[0], u.features.frames.shape[1]});
    for (int64_t f = 0; f < u.features.frames.shape[0]; ++f)
      for (int64_t c = 0; c < u.features.frames.shape[1]; ++c)
        batch.At(0, f, c) = u.features.frames.At(f, c);
    Var logits =
        model.Forward(Var(batch), {u.features.valid}, Mode::kEval, unused);
    const auto& lv = logits.Value();
    int best = 0;
    for (int64_t j = 1; j < lv.shape[1]; ++j)
      if (lv.At(0, j) > lv.At(0, best)) best = static_cast<int>(j);
    result.predictions.push_back(best);
    total += CrossEntropyMean(logits, {u.label}).Value().At(0);
  }
  result.mean_loss = total / static_cast<double>(dataset.size());
  return result;
}

TrainResult TrainLoop(LidModel& model, const Dataset& train_set, const Dataset& val_set,
                      const TrainConfig& cfg, const AugmentConfig& augment,
                      const std::string& config_snapshot) {
  cfg.Validate();
  if (train_set.empty() || val_set.empty())
    throw DataError("train: empty dataset");
  for (const auto& u : train_set)
    if (u.label < 0 || u.label >= model.NumClasses())
      throw DataError("train: label out of range for " + u.source);

  const int64_t steps_per_epoch =
      (static_cast<int64_t>(train_set.size()) + cfg.batch_size - 1) / cfg.batch_size;
  TrainConfig effective = cfg;
  if (effective.total_steps == 0)
    effective.total_steps = steps_per_epoch * cfg.max_epochs;

  Rng rng(cfg.seed);
  TrainResult result;
  int64_t step = 0;
  int bad_evals = 0;

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    // Fisher-Yates with the run rng keeps batch order seed-deterministic.
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = rng.UniformInt(static_cast<uint32_t>(i - 1));
      std::swap(order[i - 1], order[j]);
    }
    if (cfg.bucket_by_length) {
      // Stable sort on length keeps shuffled order within equal lengths;
      // bounds the padded-frame share of batch-norm statistics.
      std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return train_set[a].features.frames.shape[0] < train_set[b].features.frames.shape[0];
      });
    }

    for (int64_t b = 0; b < steps_per_epoch; ++b) {
      std::vector<size_t> batch_idx;
      for (int64_t i = b * cfg.batch_size;
           i < std::min<int64_t>((b + 1) * cfg.batch_size,
                                 static_cast<int64_t>(order.size()));
           ++i)
        batch_idx.push_back(order[static_cast<size_t>(i)]);

      // Assemble (with augmentation applied per utterance before padding).
      Dataset staged;
      staged.reserve(batch_idx.size());
      std::vector<size_t> staged_idx;
      for (size_t idx : batch_idx) {
        Utterance u = train_set[idx];
        if (augment.enabled)
          u.features.frames = ApplySpecAugment(u.features.frames, augment, rng);
        staged_idx.push_back(staged.size());
        staged.push_back(std::move(u));
      }
      Tensor batch;
      std::vector<std::vector<uint8_t>> valid;
      std::vector<int> labels;
      MakeBatch(staged, staged_idx, &batch, &valid, &labels);

      const double lr = CosineLr(step, effective);
      model.ZeroGrads();
      Var logits = model.Forward(Var(batch, false), valid, Mode::kTrain, rng);
      Var loss = CrossEntropyMean(logits, labels);
      const double loss_value = loss.Value().At(0);
      if (!std::isfinite(loss_value))
        throw NumericError("train: non-finite loss at step " + std::to_string(step));
      loss.Backward();
      SgdStep(model.Params(), CollectGrads(model.Params()), lr);

      HistoryRow row;
      row.step = step;
      row.lr = lr;
      row.train_loss = loss_value;
      row.epoch = epoch;
      result.history.push_back(row);
      ++step;
    }

    const EvalResult eval = EvaluateModel(model, val_set);
    if (!std::isfinite(eval.mean_loss))
      throw NumericError("train: non-finite validation loss after epoch " +
                         std::to_string(epoch));
    result.history.back().val_loss = eval.mean_loss;
    result.epochs_run = epoch + 1;

    if (eval.mean_loss < result.best_val_loss - cfg.plateau_min_delta) {
      result.best_val_loss = eval.mean_loss;
      bad_evals = 0;
      std::string snapshot = config_snapshot;
      snapshot += "state.best_val_loss=" + std::to_string(eval.mean_loss) + "\n";
      snapshot += "state.rng_state=" + rng.SerializeState() + "\n";
      result.best = SnapshotModel(model, static_cast<uint64_t>(step), snapshot);
    } else {
      ++bad_evals;
      if (bad_evals > cfg.plateau_patience) break;
    }
  }

  if (result.best.params.empty()) {
    // First evaluation never improved on infinity minus delta; keep the
    // current weights so callers always get a usable checkpoint.
    result.best = SnapshotModel(model, static_cast<uint64_t>(step), config_snapshot);
  }
  return result;
}

}  // namespace lid

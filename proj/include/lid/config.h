// lid/config.h

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

#ifndef LID_CONFIG_H_
#define LID_CONFIG_H_

#include <string>
#include <vector>

#include "lid/augment.h"
#include "lid/features.h"
#include "lid/model.h"

namespace lid {

struct TrainConfig {
  double lr_init = 0.005;
  double lr_min = 1e-4;
  int64_t total_steps = 0;  // 0 = derive from max_epochs * steps_per_epoch
  int batch_size = 32;
  int max_epochs = 100;
  int plateau_patience = 5;
  double plateau_min_delta = 1e-3;
  uint64_t seed = 1;
  int workers = 1;
  bool bucket_by_length = false;

  void Validate() const {
    if (!(lr_min > 0) || !(lr_min <= lr_init))
      throw ConfigError("train: need 0 < lr_min <= lr");
    if (batch_size < 1 || max_epochs < 1)
      throw ConfigError("train: batch_size and max_epochs must be >= 1");
    if (plateau_patience < 0) throw ConfigError("train: patience must be >= 0");
    if (workers < 1) throw ConfigError("train: workers must be >= 1");
  }
};

// Flat dotted-key configuration for the whole pipeline. Every key has a
// default; unknown keys are rejected.
struct RunConfig {
  FeatureConfig features;
  EncoderConfig model;
  int attention_dim = 256;
  AugmentConfig augment;
  TrainConfig train;
  std::string train_manifest;
  std::string val_manifest;

  // Parses "key=value"; throws ConfigError on unknown keys or bad values.
  void Set(const std::string& key, const std::string& value);

  // Reads a UTF-8 key=value file; '#' comments and blank lines are skipped.
  void LoadFile(const std::string& path);

  // Applies "key=value" override strings (CLI flags win over file values).
  void ApplyOverrides(const std::vector<std::string>& overrides);

  // Fully-resolved key=value text; re-parses to an identical configuration.
  std::string Serialize() const;

  void Validate() const;
};

}  // namespace lid

#endif  // LID_CONFIG_H_

// lid/augment.h

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

#ifndef LID_AUGMENT_H_
#define LID_AUGMENT_H_

#include <cstdint>
#include <string>

#include "lid/error.h"
#include "lid/rng.h"
#include "lid/tensor.h"

namespace lid {

// Spectrogram masking. Defaults are scaled to the 40-bin feature height;
// time warping is intentionally not implemented.
struct AugmentConfig {
  bool enabled = false;
  int freq_mask_param = 8;
  int n_freq_masks = 2;
  int time_mask_param = 20;
  int n_time_masks = 2;
  float mask_value = 0.0f;

  void Validate(int n_mels) const {
    if (freq_mask_param < 0 || time_mask_param < 0 || n_freq_masks < 0 || n_time_masks < 0)
      throw ConfigError("augment: mask parameters must be non-negative");
    if (freq_mask_param >= n_mels)
      throw ConfigError("augment: freq_mask_param must be < n_mels (" +
                        std::to_string(n_mels) + ")");
  }
};

// Sets coefficient columns [f0, f0+f) to mask_value in every frame.
inline Tensor FreqMask(const Tensor& features, int64_t f0, int64_t f,
                       float mask_value = 0.0f) {
  if (features.Rank() != 2)
    throw DimensionError("freq_mask: expected [TxF], got " + features.ShapeStr());
  const int64_t n_mels = features.shape[1];
  if (f0 < 0 || f < 0 || f0 + f > n_mels)
    throw DimensionError("freq_mask: band [" + std::to_string(f0) + ", " +
                         std::to_string(f0 + f) + ") out of range for " +
                         std::to_string(n_mels) + " bins");
  Tensor out = features;
  for (int64_t t = 0; t < out.shape[0]; ++t)
    for (int64_t k = f0; k < f0 + f; ++k) out.At(t, k) = mask_value;
  return out;
}

// Sets frames [t0, t0+t) to mask_value across all coefficients.
inline Tensor TimeMask(const Tensor& features, int64_t t0, int64_t t,
                       float mask_value = 0.0f) {
  if (features.Rank() != 2)
    throw DimensionError("time_mask: expected [TxF], got " + features.ShapeStr());
  const int64_t frames = features.shape[0];
  if (t0 < 0 || t < 0 || t0 + t > frames)
    throw DimensionError("time_mask: span [" + std::to_string(t0) + ", " +
                         std::to_string(t0 + t) + ") out of range for " +
                         std::to_string(frames) + " frames");
  Tensor out = features;
  for (int64_t i = t0; i < t0 + t; ++i)
    for (int64_t k = 0; k < out.shape[1]; ++k) out.At(i, k) = mask_value;
  return out;
}

// Draws each mask width uniformly from [0, param] and each start uniformly
// over positions keeping the mask in bounds. Disabled mode is the identity.
inline Tensor ApplySpecAugment(const Tensor& features, const AugmentConfig& cfg, Rng& rng) {
  if (!cfg.enabled) return features;
  cfg.Validate(static_cast<int>(features.shape[1]));
  Tensor out = features;
  const int64_t n_mels = features.shape[1];
  const int64_t frames = features.shape[0];
  for (int i = 0; i < cfg.n_freq_masks; ++i) {
    const int64_t width = rng.UniformInt(static_cast<uint32_t>(
        std::min<int64_t>(cfg.freq_mask_param, n_mels)));
    const int64_t start = rng.UniformInt(static_cast<uint32_t>(n_mels - width));
    out = FreqMask(out, start, width, cfg.mask_value);
  }
  for (int i = 0; i < cfg.n_time_masks; ++i) {
    const int64_t width = rng.UniformInt(static_cast<uint32_t>(
        std::min<int64_t>(cfg.time_mask_param, frames)));
    const int64_t start = rng.UniformInt(static_cast<uint32_t>(frames - width));
    out = TimeMask(out, start, width, cfg.mask_value);
  }
  return out;
}

}  // namespace lid

#endif  // LID_AUGMENT_H_

// lid/features.h

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

#ifndef LID_FEATURES_H_
#define LID_FEATURES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lid/error.h"
#include "lid/tensor.h"

namespace lid {

struct AudioClip {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = 16000;
};

// Front-end settings. Only the 40-dimensional mel height is architectural;
// the rest are standard 25ms/10ms speech defaults.
struct FeatureConfig {
  int sample_rate = 16000;
  int window = 400;  // 25 ms
  int hop = 160;     // 10 ms
  int fft_size = 512;
  int n_mels = 40;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;
  double pre_emphasis = 0.97;
  bool normalize = false;  // per-utterance per-coefficient standardization

  void Validate() const;
};

// T x n_mels log-mel frames plus per-frame validity (all true until padded).
struct FeatureSequence {
  Tensor frames;
  std::vector<uint8_t> valid;

  static FeatureSequence FromFrames(Tensor f) {
    FeatureSequence s;
    s.valid.assign(static_cast<size_t>(f.shape[0]), 1);
    s.frames = std::move(f);
    return s;
  }
};

// RIFF/WAVE PCM 16-bit LE mono decode; samples scaled by 1/32768.
// Rejects (rather than converts) other formats, channel counts and rates.
AudioClip ReadWav(const std::string& path);

// Writes a mono 16-bit PCM WAV; used by the synthetic-data tooling and tests.
void WriteWav(const std::string& path, const AudioClip& clip);

// Pre-emphasis then Hann-windowed frames: T = 1 + floor((N - window) / hop).
Tensor FrameSignal(const AudioClip& clip, const FeatureConfig& cfg);

// Zero-pads each frame to fft_size and returns |X[k]|^2, k = 0..fft_size/2.
Tensor PowerSpectrum(const Tensor& frames, int fft_size);

// Triangular mel filters [n_mels x (fft_size/2 + 1)], peak 1 at the center bin.
Tensor BuildMelFilterbank(const FeatureConfig& cfg);

double HzToMel(double hz);
double MelToHz(double mel);

// log(max(filterbank . power, log_floor)) per frame.
FeatureSequence ComputeMfsc(const AudioClip& clip, const FeatureConfig& cfg);

// Orthonormal DCT-II along the coefficient axis, truncated to n_coeffs.
FeatureSequence DctMfcc(const FeatureSequence& features, int n_coeffs);

// LIDF feature file: "LIDF", u32 LE version=1, u32 LE T, u32 LE n_mels,
// then T*n_mels float32 LE, frame-major.
void WriteLidf(const std::string& path, const Tensor& frames);
Tensor ReadLidf(const std::string& path);

}  // namespace lid

#endif  // LID_FEATURES_H_

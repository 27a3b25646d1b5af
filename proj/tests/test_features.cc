// tests/test_features.cc

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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lid/features.h"

using namespace lid;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

AudioClip Silence(int n, int rate = 16000) {
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.assign(static_cast<size_t>(n), 0.0f);
  return clip;
}

}  // namespace

TEST_CASE("wav round trip of silence") {
  const std::string path = TempPath("lid_silence.wav");
  WriteWav(path, Silence(16000));
  AudioClip clip = ReadWav(path);
  CHECK(clip.sample_rate == 16000);
  CHECK(clip.samples.size() == 16000);
  for (float s : clip.samples) CHECK(s == 0.0f);
  std::remove(path.c_str());
}

TEST_CASE("wav 16-bit scaling: 16384 -> 0.5") {
  const std::string path = TempPath("lid_scale.wav");
  {
    // Hand-build the file so the sample word is exactly 16384.
    std::ofstream out(path, std::ios::binary);
    auto u16 = [&](uint16_t v) { out.put(static_cast<char>(v & 0xff)); out.put(static_cast<char>(v >> 8)); };
    auto u32 = [&](uint32_t v) { for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff)); };
    out.write("RIFF", 4); u32(38); out.write("WAVE", 4);
    out.write("fmt ", 4); u32(16); u16(1); u16(1); u32(16000); u32(32000); u16(2); u16(16);
    out.write("data", 4); u32(2); u16(16384);
  }
  AudioClip clip = ReadWav(path);
  REQUIRE(clip.samples.size() == 1);
  CHECK(clip.samples[0] == doctest::Approx(0.5));
  std::remove(path.c_str());
}

TEST_CASE("wav stereo rejected with channel-count error") {
  const std::string path = TempPath("lid_stereo.wav");
  {
    std::ofstream out(path, std::ios::binary);
    auto u16 = [&](uint16_t v) { out.put(static_cast<char>(v & 0xff)); out.put(static_cast<char>(v >> 8)); };
    auto u32 = [&](uint32_t v) { for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff)); };
    out.write("RIFF", 4); u32(40); out.write("WAVE", 4);
    out.write("fmt ", 4); u32(16); u16(1); u16(2); u32(16000); u32(64000); u16(4); u16(16);
    out.write("data", 4); u32(4); u16(0); u16(0);
  }
  try {
    ReadWav(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("channels") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("framing arithmetic: one second at 16 kHz gives 98 frames") {
  FeatureConfig cfg;
  Tensor frames = FrameSignal(Silence(16000), cfg);
  CHECK(frames.shape[0] == 98);
  CHECK(frames.shape[1] == 400);
}

TEST_CASE("frame count formula holds across lengths") {
  FeatureConfig cfg;
  for (int n : {400, 401, 560, 799, 16000, 31999}) {
    Tensor frames = FrameSignal(Silence(n), cfg);
    CHECK(frames.shape[0] == 1 + (n - cfg.window) / cfg.hop);
  }
}

TEST_CASE("clip shorter than a window is rejected") {
  FeatureConfig cfg;
  CHECK_THROWS_AS(FrameSignal(Silence(399), cfg), DataError);
}

TEST_CASE("hann window center weight is 1") {
  // Center a unit impulse mid-window with pre-emphasis off.
  FeatureConfig cfg;
  cfg.pre_emphasis = 0.0;
  AudioClip clip = Silence(400);
  const int center = (cfg.window - 1) / 2;  // cos(pi) term -> weight 1 at 199.5; check 199 & 200
  clip.samples[static_cast<size_t>(center)] = 1.0f;
  Tensor frames = FrameSignal(clip, cfg);
  const double expected = 0.5 * (1.0 - std::cos(2.0 * kPi * center / (cfg.window - 1)));
  CHECK(frames.At(0, center) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(expected == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("zero clip gives zero frames") {
  FeatureConfig cfg;
  Tensor frames = FrameSignal(Silence(1000), cfg);
  for (float v : frames.data) CHECK(v == 0.0f);
}

TEST_CASE("power spectrum of bin-aligned cosine concentrates at its bin") {
  // Unwindowed path: frame length equals fft_size, amplitude 1, bin 8.
  const int n = 512, k0 = 8;
  Tensor frames({1, n});
  for (int i = 0; i < n; ++i)
    frames.At(0, i) = static_cast<float>(std::cos(2.0 * kPi * k0 * i / n));
  Tensor power = PowerSpectrum(frames, n);
  CHECK(power.At(0, k0) == doctest::Approx(n * n / 4.0).epsilon(1e-6));
  for (int k = 0; k <= n / 2; ++k) {
    if (k == k0) continue;
    CHECK(power.At(0, k) < 1e-9 * power.At(0, k0));
  }
}

TEST_CASE("power spectrum of zero frame is zero") {
  Tensor power = PowerSpectrum(Tensor({2, 400}), 512);
  for (float v : power.data) CHECK(v == 0.0f);
}

TEST_CASE("power spectrum of unit impulse is flat ones") {
  Tensor frames({1, 400});
  frames.At(0, 0) = 1.0f;
  Tensor power = PowerSpectrum(frames, 512);
  for (int k = 0; k <= 256; ++k) CHECK(power.At(0, k) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("power spectrum rejects non-power-of-two fft") {
  CHECK_THROWS_AS(PowerSpectrum(Tensor({1, 100}), 500), ConfigError);
}

TEST_CASE("mel scale anchor points") {
  CHECK(HzToMel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)).epsilon(1e-9));
  CHECK(HzToMel(700.0) == doctest::Approx(781.17).epsilon(0.01 / 781.0));
  CHECK(HzToMel(0.0) == 0.0);
  CHECK(MelToHz(HzToMel(1234.5)) == doctest::Approx(1234.5).epsilon(1e-9));
}

TEST_CASE("mel filterbank shape, non-negativity and single peak") {
  FeatureConfig cfg;
  Tensor fb = BuildMelFilterbank(cfg);
  CHECK(fb.shape[0] == 40);
  CHECK(fb.shape[1] == 257);
  for (int m = 0; m < 40; ++m) {
    float peak = 0;
    int peak_count = 0;
    for (int k = 0; k < 257; ++k) {
      CHECK(fb.At(m, k) >= 0.0f);
      peak = std::max(peak, fb.At(m, k));
    }
    CHECK(peak == doctest::Approx(1.0));
    for (int k = 0; k < 257; ++k)
      if (fb.At(m, k) == peak) ++peak_count;
    CHECK(peak_count == 1);
  }
}

TEST_CASE("mel filter centers strictly increase") {
  FeatureConfig cfg;
  Tensor fb = BuildMelFilterbank(cfg);
  int prev_center = -1;
  for (int m = 0; m < 40; ++m) {
    int center = 0;
    for (int k = 1; k < 257; ++k)
      if (fb.At(m, k) > fb.At(m, center)) center = k;
    CHECK(center > prev_center);
    prev_center = center;
  }
}

TEST_CASE("too many mel filters for the fft resolution is a config error") {
  FeatureConfig cfg;
  cfg.fft_size = 64;
  cfg.window = 64;
  cfg.hop = 32;
  cfg.n_mels = 64;
  CHECK_THROWS_AS(BuildMelFilterbank(cfg), ConfigError);
}

TEST_CASE("mfsc of silence hits the log floor everywhere") {
  FeatureConfig cfg;
  FeatureSequence seq = ComputeMfsc(Silence(16000), cfg);
  CHECK(seq.frames.shape[0] == 98);
  CHECK(seq.frames.shape[1] == 40);
  const float floor_log = static_cast<float>(std::log(1e-10));
  for (float v : seq.frames.data) CHECK(v == doctest::Approx(floor_log));
  for (uint8_t v : seq.valid) CHECK(v == 1);
}

TEST_CASE("mfsc values stay finite and deterministic") {
  FeatureConfig cfg;
  AudioClip clip = Silence(8000);
  for (size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = 0.5f * static_cast<float>(std::sin(2.0 * kPi * 441.0 * i / 16000.0));
  FeatureSequence a = ComputeMfsc(clip, cfg);
  FeatureSequence b = ComputeMfsc(clip, cfg);
  for (float v : a.frames.data) CHECK(std::isfinite(v));
  CHECK(a.frames.data == b.frames.data);  // bit-identical
}

TEST_CASE("doubling amplitude never decreases any mfsc coefficient") {
  FeatureConfig cfg;
  AudioClip clip = Silence(8000);
  for (size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = 0.25f * static_cast<float>(std::sin(2.0 * kPi * 300.0 * i / 16000.0) +
                                                 0.5 * std::sin(2.0 * kPi * 1731.0 * i / 16000.0));
  AudioClip doubled = clip;
  for (auto& s : doubled.samples) s *= 2.0f;
  FeatureSequence base = ComputeMfsc(clip, cfg);
  FeatureSequence loud = ComputeMfsc(doubled, cfg);
  for (int64_t i = 0; i < base.frames.Numel(); ++i)
    CHECK(loud.frames.At(i) >= base.frames.At(i) - 1e-5f);
}

TEST_CASE("mismatched sample rate is rejected, not resampled") {
  FeatureConfig cfg;
  CHECK_THROWS_AS(ComputeMfsc(Silence(16000, 8000), cfg), DataError);
}

TEST_CASE("dct of a constant row concentrates in coefficient zero") {
  FeatureSequence seq;
  seq.frames = Tensor::Full({3, 40}, 2.5f);
  seq.valid.assign(3, 1);
  FeatureSequence mfcc = DctMfcc(seq, 13);
  for (int64_t t = 0; t < 3; ++t) {
    CHECK(mfcc.frames.At(t, 0) == doctest::Approx(2.5 * std::sqrt(40.0)).epsilon(1e-5));
    for (int64_t k = 1; k < 13; ++k)
      CHECK(mfcc.frames.At(t, k) == doctest::Approx(0.0).epsilon(1e-5));
  }
}

TEST_CASE("full dct round-trips through the inverse within 1e-4") {
  FeatureSequence seq;
  seq.frames = Tensor({2, 40});
  seq.valid.assign(2, 1);
  for (int64_t i = 0; i < seq.frames.Numel(); ++i)
    seq.frames.At(i) = static_cast<float>(std::sin(0.37 * static_cast<double>(i)));
  FeatureSequence mfcc = DctMfcc(seq, 40);
  // Inverse orthonormal DCT-II oracle.
  for (int64_t t = 0; t < 2; ++t) {
    for (int64_t i = 0; i < 40; ++i) {
      double acc = 0;
      for (int64_t k = 0; k < 40; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / 40.0) : std::sqrt(2.0 / 40.0);
        acc += scale * mfcc.frames.At(t, k) *
               std::cos(kPi * (static_cast<double>(i) + 0.5) * static_cast<double>(k) / 40.0);
      }
      CHECK(acc == doctest::Approx(seq.frames.At(t, i)).epsilon(1e-4));
    }
  }
}

TEST_CASE("dct of zeros is zeros; bad n_coeffs rejected") {
  FeatureSequence seq;
  seq.frames = Tensor({2, 40});
  seq.valid.assign(2, 1);
  FeatureSequence mfcc = DctMfcc(seq, 40);
  for (float v : mfcc.frames.data) CHECK(v == 0.0f);
  CHECK_THROWS_AS(DctMfcc(seq, 41), ConfigError);
  CHECK_THROWS_AS(DctMfcc(seq, 0), ConfigError);
}

TEST_CASE("lidf write-read round trip is byte identical") {
  Tensor frames({5, 40});
  for (int64_t i = 0; i < frames.Numel(); ++i)
    frames.At(i) = static_cast<float>(std::cos(0.1 * static_cast<double>(i)));
  const std::string a = TempPath("lid_feat_a.lidf");
  const std::string b = TempPath("lid_feat_b.lidf");
  WriteLidf(a, frames);
  Tensor loaded = ReadLidf(a);
  CHECK(loaded.shape == frames.shape);
  CHECK(loaded.data == frames.data);
  WriteLidf(b, loaded);
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ca == cb);
  CHECK(ca.substr(0, 4) == "LIDF");
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST_CASE("lidf bad magic and version rejected") {
  const std::string path = TempPath("lid_feat_bad.lidf");
  {
    std::ofstream out(path, std::ios::binary);
    out.write("NOPE", 4);
  }
  CHECK_THROWS_AS(ReadLidf(path), DataError);
  {
    std::ofstream out(path, std::ios::binary);
    out.write("LIDF", 4);
    const uint32_t v2 = 2;
    out.write(reinterpret_cast<const char*>(&v2), 4);
  }
  CHECK_THROWS_AS(ReadLidf(path), DataError);
  std::remove(path.c_str());
}

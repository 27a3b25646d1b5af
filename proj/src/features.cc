// src/features.cc

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

#include "lid/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>

namespace lid {

namespace {

constexpr double kPi = 3.14159265358979323846;

uint32_t ReadU32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t ReadU16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void WriteU32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 4);
}

void WriteU16(std::ostream& out, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 2);
}

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT.
void Fft(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

void FeatureConfig::Validate() const {
  if (sample_rate <= 0) throw ConfigError("features: sample_rate must be positive");
  if (window > fft_size) throw ConfigError("features: window must be <= fft_size");
  if (hop <= 0 || hop > window) throw ConfigError("features: hop must be in (0, window]");
  if (!(f_min < f_max) || f_max > sample_rate / 2.0)
    throw ConfigError("features: need f_min < f_max <= sample_rate/2");
  if (n_mels < 1) throw ConfigError("features: n_mels must be >= 1");
  if (!IsPowerOfTwo(fft_size))
    throw ConfigError("features: fft_size must be a power of two, got " +
                      std::to_string(fft_size));
  if (log_floor <= 0) throw ConfigError("features: log_floor must be positive");
}

AudioClip ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("wav: cannot open " + path);
  char tag[5] = {0};
  in.read(tag, 4);
  if (std::strncmp(tag, "RIFF", 4) != 0)
    throw DataError("wav: missing RIFF header in " + path);
  ReadU32(in);  // riff size
  in.read(tag, 4);
  if (std::strncmp(tag, "WAVE", 4) != 0)
    throw DataError("wav: missing WAVE tag in " + path);

  AudioClip clip;
  bool have_fmt = false;
  while (in.read(tag, 4)) {
    const uint32_t chunk_size = ReadU32(in);
    if (std::strncmp(tag, "fmt ", 4) == 0) {
      const uint16_t audio_format = ReadU16(in);
      const uint16_t channels = ReadU16(in);
      const uint32_t rate = ReadU32(in);
      ReadU32(in);  // byte rate
      ReadU16(in);  // block align
      const uint16_t bits = ReadU16(in);
      if (chunk_size > 16) in.ignore(chunk_size - 16);
      if (audio_format != 1)
        throw DataError("wav: audio_format must be PCM (1), got " +
                        std::to_string(audio_format) + " in " + path);
      if (channels != 1)
        throw DataError("wav: channels must be 1 (mono), got " +
                        std::to_string(channels) + " in " + path);
      if (bits != 16)
        throw DataError("wav: bits_per_sample must be 16, got " +
                        std::to_string(bits) + " in " + path);
      clip.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (std::strncmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw DataError("wav: data chunk before fmt in " + path);
      const uint32_t n = chunk_size / 2;
      clip.samples.resize(n);
      for (uint32_t i = 0; i < n; ++i) {
        const uint16_t raw = ReadU16(in);
        const int16_t s = static_cast<int16_t>(raw);
        clip.samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return clip;
    } else {
      in.ignore(chunk_size + (chunk_size & 1));
    }
  }
  throw DataError("wav: no data chunk in " + path);
}

void WriteWav(const std::string& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("wav: cannot write " + path);
  const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  out.write("RIFF", 4);
  WriteU32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  WriteU32(out, 16);
  WriteU16(out, 1);  // PCM
  WriteU16(out, 1);  // mono
  WriteU32(out, static_cast<uint32_t>(clip.sample_rate));
  WriteU32(out, static_cast<uint32_t>(clip.sample_rate * 2));
  WriteU16(out, 2);
  WriteU16(out, 16);
  out.write("data", 4);
  WriteU32(out, data_bytes);
  for (float s : clip.samples) {
    const double clamped = std::clamp(static_cast<double>(s), -1.0, 1.0);
    const int16_t q = static_cast<int16_t>(std::lrint(clamped * 32767.0));
    WriteU16(out, static_cast<uint16_t>(q));
  }
}

Tensor FrameSignal(const AudioClip& clip, const FeatureConfig& cfg) {
  cfg.Validate();
  const int64_t n = static_cast<int64_t>(clip.samples.size());
  if (n < cfg.window)
    throw DataError("framing: clip of " + std::to_string(n) +
                    " samples is shorter than one window (" +
                    std::to_string(cfg.window) + ")");
  // Pre-emphasis y[n] = x[n] - a*x[n-1], y[0] = x[0].
  std::vector<double> emphasized(static_cast<size_t>(n));
  emphasized[0] = clip.samples[0];
  for (int64_t i = 1; i < n; ++i)
    emphasized[static_cast<size_t>(i)] =
        clip.samples[static_cast<size_t>(i)] -
        cfg.pre_emphasis * clip.samples[static_cast<size_t>(i - 1)];

  const int64_t t = 1 + (n - cfg.window) / cfg.hop;
  std::vector<double> hann(static_cast<size_t>(cfg.window));
  for (int i = 0; i < cfg.window; ++i)
    hann[static_cast<size_t>(i)] =
        0.5 * (1.0 - std::cos(2.0 * kPi * i / (cfg.window - 1)));

  Tensor frames({t, cfg.window});
  for (int64_t f = 0; f < t; ++f) {
    const int64_t start = f * cfg.hop;
    for (int i = 0; i < cfg.window; ++i)
      frames.At(f, i) = static_cast<float>(emphasized[static_cast<size_t>(start + i)] *
                                           hann[static_cast<size_t>(i)]);
  }
  return frames;
}

Tensor PowerSpectrum(const Tensor& frames, int fft_size) {
  if (!IsPowerOfTwo(fft_size))
    throw ConfigError("power_spectrum: fft_size must be a power of two, got " +
                      std::to_string(fft_size));
  if (frames.Rank() != 2 || frames.shape[1] > fft_size)
    throw DimensionError("power_spectrum: frames " + frames.ShapeStr() +
                         " do not fit fft_size " + std::to_string(fft_size));
  const int64_t t = frames.shape[0];
  const int64_t w = frames.shape[1];
  const int64_t bins = fft_size / 2 + 1;
  Tensor out({t, bins});
  std::vector<std::complex<double>> buf(static_cast<size_t>(fft_size));
  for (int64_t f = 0; f < t; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0, 0));
    for (int64_t i = 0; i < w; ++i) buf[static_cast<size_t>(i)] = frames.At(f, i);
    Fft(buf);
    for (int64_t k = 0; k < bins; ++k)
      out.At(f, k) = static_cast<float>(std::norm(buf[static_cast<size_t>(k)]));
  }
  return out;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor BuildMelFilterbank(const FeatureConfig& cfg) {
  cfg.Validate();
  const int64_t bins = cfg.fft_size / 2 + 1;
  const double mel_lo = HzToMel(cfg.f_min);
  const double mel_hi = HzToMel(cfg.f_max);
  // n_mels + 2 equally spaced mel points, snapped to FFT bins so every
  // filter peaks at exactly 1 on its center bin.
  std::vector<int64_t> bin(static_cast<size_t>(cfg.n_mels) + 2);
  for (int m = 0; m < cfg.n_mels + 2; ++m) {
    const double mel = mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mels + 1);
    const double hz = MelToHz(mel);
    bin[static_cast<size_t>(m)] =
        static_cast<int64_t>(std::floor((cfg.fft_size + 1) * hz / cfg.sample_rate));
  }
  Tensor fb({cfg.n_mels, bins});
  for (int m = 1; m <= cfg.n_mels; ++m) {
    const int64_t left = bin[static_cast<size_t>(m - 1)];
    const int64_t center = bin[static_cast<size_t>(m)];
    const int64_t right = bin[static_cast<size_t>(m + 1)];
    if (center <= left || right <= center)
      throw ConfigError("mel filterbank: filter " + std::to_string(m - 1) +
                        " has zero support; reduce n_mels or raise fft_size");
    for (int64_t k = left; k < center; ++k)
      fb.At(m - 1, k) = static_cast<float>(static_cast<double>(k - left) / (center - left));
    for (int64_t k = center; k <= right && k < bins; ++k)
      fb.At(m - 1, k) = static_cast<float>(static_cast<double>(right - k) / (right - center));
  }
  return fb;
}

FeatureSequence ComputeMfsc(const AudioClip& clip, const FeatureConfig& cfg) {
  cfg.Validate();
  if (clip.sample_rate != cfg.sample_rate)
    throw DataError("features: sample_rate " + std::to_string(clip.sample_rate) +
                    " does not match configured " + std::to_string(cfg.sample_rate) +
                    " (resampling not supported)");
  const Tensor frames = FrameSignal(clip, cfg);
  const Tensor power = PowerSpectrum(frames, cfg.fft_size);
  const Tensor fb = BuildMelFilterbank(cfg);
  const int64_t t = power.shape[0];
  const int64_t bins = power.shape[1];
  Tensor out({t, cfg.n_mels});
  for (int64_t f = 0; f < t; ++f) {
    for (int m = 0; m < cfg.n_mels; ++m) {
      double energy = 0;
      for (int64_t k = 0; k < bins; ++k)
        energy += static_cast<double>(fb.At(m, k)) * power.At(f, k);
      out.At(f, m) = static_cast<float>(std::log(std::max(energy, cfg.log_floor)));
    }
  }
  if (cfg.normalize) {
    for (int m = 0; m < cfg.n_mels; ++m) {
      double mean = 0;
      for (int64_t f = 0; f < t; ++f) mean += out.At(f, m);
      mean /= static_cast<double>(t);
      double var = 0;
      for (int64_t f = 0; f < t; ++f) {
        const double d = out.At(f, m) - mean;
        var += d * d;
      }
      var /= static_cast<double>(t);
      const double inv = 1.0 / std::sqrt(var + 1e-8);
      for (int64_t f = 0; f < t; ++f)
        out.At(f, m) = static_cast<float>((out.At(f, m) - mean) * inv);
    }
  }
  return FeatureSequence::FromFrames(std::move(out));
}

FeatureSequence DctMfcc(const FeatureSequence& features, int n_coeffs) {
  const int64_t n = features.frames.shape[1];
  if (n_coeffs < 1 || n_coeffs > n)
    throw ConfigError("dct: n_coeffs must be in [1, " + std::to_string(n) + "], got " +
                      std::to_string(n_coeffs));
  const int64_t t = features.frames.shape[0];
  Tensor out({t, n_coeffs});
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (int64_t f = 0; f < t; ++f) {
    for (int64_t k = 0; k < n_coeffs; ++k) {
      double acc = 0;
      for (int64_t i = 0; i < n; ++i)
        acc += features.frames.At(f, i) *
               std::cos(kPi * (i + 0.5) * static_cast<double>(k) / static_cast<double>(n));
      out.At(f, k) = static_cast<float>(acc * (k == 0 ? scale0 : scale));
    }
  }
  FeatureSequence result;
  result.frames = std::move(out);
  result.valid = features.valid;
  return result;
}

void WriteLidf(const std::string& path, const Tensor& frames) {
  if (frames.Rank() != 2)
    throw DimensionError("lidf: expected rank-2 frames, got " + frames.ShapeStr());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("lidf: cannot write " + path);
  out.write("LIDF", 4);
  WriteU32(out, 1);
  WriteU32(out, static_cast<uint32_t>(frames.shape[0]));
  WriteU32(out, static_cast<uint32_t>(frames.shape[1]));
  for (float v : frames.data) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    WriteU32(out, bits);
  }
}

Tensor ReadLidf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("lidf: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::strncmp(magic, "LIDF", 4) != 0)
    throw DataError("lidf: bad magic in " + path);
  const uint32_t version = ReadU32(in);
  if (version != 1)
    throw DataError("lidf: unsupported version " + std::to_string(version) + " in " + path);
  const uint32_t t = ReadU32(in);
  const uint32_t n_mels = ReadU32(in);
  if (!in || t == 0 || n_mels == 0)
    throw DataError("lidf: bad header dimensions in " + path);
  Tensor frames({static_cast<int64_t>(t), static_cast<int64_t>(n_mels)});
  for (auto& v : frames.data) {
    const uint32_t bits = ReadU32(in);
    if (!in) throw DataError("lidf: truncated payload in " + path);
    std::memcpy(&v, &bits, 4);
  }
  return frames;
}

}  // namespace lid

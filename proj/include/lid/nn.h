// lid/nn.h

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

#ifndef LID_NN_H_
#define LID_NN_H_

#include <cmath>
#include <string>
#include <vector>

#include "lid/autodiff.h"
#include "lid/error.h"
#include "lid/rng.h"
#include "lid/tensor.h"

namespace lid {

enum class Mode { kTrain, kEval };

namespace detail {

// Views x as [N x T x C]; rank-2 input is a batch of one.
template <typename Real>
void ConvDims(const TensorT<Real>& x, int64_t* n, int64_t* t, int64_t* c) {
  if (x.Rank() == 2) {
    *n = 1;
    *t = x.shape[0];
    *c = x.shape[1];
  } else if (x.Rank() == 3) {
    *n = x.shape[0];
    *t = x.shape[1];
    *c = x.shape[2];
  } else {
    throw DimensionError("conv expects [TxC] or [NxTxC], got " + x.ShapeStr());
  }
}

}  // namespace detail

// Depthwise temporal convolution with symmetric zero same-padding.
// x: [TxC] or [NxTxC]; kernel: [CxK], K odd. Stride 1, dilation 1.
template <typename Real>
VarT<Real> DepthwiseConv1d(const VarT<Real>& x, const VarT<Real>& kernel) {
  const auto& xv = x.Value();
  const auto& kv = kernel.Value();
  int64_t n, t, c;
  detail::ConvDims(xv, &n, &t, &c);
  if (kv.Rank() != 2 || kv.shape[0] != c)
    throw DimensionError("depthwise_conv1d: channel mismatch " + xv.ShapeStr() +
                         " vs kernel " + kv.ShapeStr());
  const int64_t k = kv.shape[1];
  if (k % 2 == 0) throw DimensionError("depthwise_conv1d: kernel size must be odd");
  const int64_t pad = (k - 1) / 2;
  TensorT<Real> out(xv.shape);
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t i = 0; i < t; ++i) {
      for (int64_t ch = 0; ch < c; ++ch) {
        Real acc = 0;
        for (int64_t j = 0; j < k; ++j) {
          const int64_t s = i + j - pad;
          if (s < 0 || s >= t) continue;
          acc += kv.At(ch, j) * xv.data[static_cast<size_t>((b * t + s) * c + ch)];
        }
        out.data[static_cast<size_t>((b * t + i) * c + ch)] = acc;
      }
    }
  }
  TensorT<Real> xs = xv, ks = kv;
  return VarT<Real>::FromOp(
      std::move(out), {x, kernel},
      [xs, ks, n, t, c, k, pad](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t b = 0; b < n; ++b) {
          for (int64_t i = 0; i < t; ++i) {
            for (int64_t ch = 0; ch < c; ++ch) {
              const Real gv = g.data[static_cast<size_t>((b * t + i) * c + ch)];
              if (gv == Real(0)) continue;
              for (int64_t j = 0; j < k; ++j) {
                const int64_t s = i + j - pad;
                if (s < 0 || s >= t) continue;
                detail::AddInto(gp[0], (b * t + s) * c + ch, gv * ks.At(ch, j));
                detail::AddInto(gp[1], ch * k + j,
                                gv * xs.data[static_cast<size_t>((b * t + s) * c + ch)]);
              }
            }
          }
        }
      });
}

// Full cross-channel 1D convolution, same-padding.
// x: [TxC_in] or [NxTxC_in]; kernel: [C_out x C_in x K].
template <typename Real>
VarT<Real> Conv1dFull(const VarT<Real>& x, const VarT<Real>& kernel) {
  const auto& xv = x.Value();
  const auto& kv = kernel.Value();
  int64_t n, t, cin;
  detail::ConvDims(xv, &n, &t, &cin);
  if (kv.Rank() != 3 || kv.shape[1] != cin)
    throw DimensionError("conv1d: channel mismatch " + xv.ShapeStr() +
                         " vs kernel " + kv.ShapeStr());
  const int64_t cout = kv.shape[0], k = kv.shape[2];
  if (k % 2 == 0) throw DimensionError("conv1d: kernel size must be odd");
  const int64_t pad = (k - 1) / 2;
  std::vector<int64_t> oshape = xv.shape;
  oshape.back() = cout;
  TensorT<Real> out(oshape);
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t i = 0; i < t; ++i) {
      for (int64_t o = 0; o < cout; ++o) {
        Real acc = 0;
        for (int64_t j = 0; j < k; ++j) {
          const int64_t s = i + j - pad;
          if (s < 0 || s >= t) continue;
          for (int64_t ci = 0; ci < cin; ++ci)
            acc += kv.At(o, ci, j) * xv.data[static_cast<size_t>((b * t + s) * cin + ci)];
        }
        out.data[static_cast<size_t>((b * t + i) * cout + o)] = acc;
      }
    }
  }
  TensorT<Real> xs = xv, ks = kv;
  return VarT<Real>::FromOp(
      std::move(out), {x, kernel},
      [xs, ks, n, t, cin, cout, k, pad](const TensorT<Real>& g,
                                        std::vector<TensorT<Real>*>& gp) {
        for (int64_t b = 0; b < n; ++b) {
          for (int64_t i = 0; i < t; ++i) {
            for (int64_t o = 0; o < cout; ++o) {
              const Real gv = g.data[static_cast<size_t>((b * t + i) * cout + o)];
              if (gv == Real(0)) continue;
              for (int64_t j = 0; j < k; ++j) {
                const int64_t s = i + j - pad;
                if (s < 0 || s >= t) continue;
                for (int64_t ci = 0; ci < cin; ++ci) {
                  detail::AddInto(gp[0], (b * t + s) * cin + ci, gv * ks.At(o, ci, j));
                  detail::AddInto(gp[1], (o * cin + ci) * k + j,
                                  gv * xs.data[static_cast<size_t>((b * t + s) * cin + ci)]);
                }
              }
            }
          }
        }
      });
}

// Batch normalization over all leading dims per channel (last dim).
// Train mode uses batch statistics (biased variance) and updates the running
// stats in place by momentum; eval mode uses the running stats.
template <typename Real>
VarT<Real> BatchNorm(const VarT<Real>& x, const VarT<Real>& gamma,
                     const VarT<Real>& beta, VarT<Real>& running_mean,
                     VarT<Real>& running_var, Real eps, Real momentum, Mode mode) {
  const auto& xv = x.Value();
  const int64_t c = xv.shape.back();
  const int64_t m = detail::RowsOf(xv.shape);
  if (gamma.Value().Numel() != c || beta.Value().Numel() != c ||
      running_mean.Value().Numel() != c || running_var.Value().Numel() != c)
    throw DimensionError("batchnorm: parameter size does not match " +
                         std::to_string(c) + " channels");
  TensorT<Real> out(xv.shape);
  TensorT<Real> xhat(xv.shape);
  TensorT<Real> invstd({c});
  const auto& gv = gamma.Value();
  const auto& bv = beta.Value();

  if (mode == Mode::kTrain) {
    if (m < 2)
      throw DimensionError("batchnorm: train mode needs >= 2 rows, got " +
                           std::to_string(m));
    for (int64_t ch = 0; ch < c; ++ch) {
      // Statistics in double: float accumulation over many rows loses enough
      // precision to show up in gradient checks.
      double mean_acc = 0;
      for (int64_t r = 0; r < m; ++r) mean_acc += xv.data[static_cast<size_t>(r * c + ch)];
      const Real mean = static_cast<Real>(mean_acc / static_cast<double>(m));
      double var_acc = 0;
      for (int64_t r = 0; r < m; ++r) {
        const double d = static_cast<double>(xv.data[static_cast<size_t>(r * c + ch)]) - mean;
        var_acc += d * d;
      }
      const Real var = static_cast<Real>(var_acc / static_cast<double>(m));
      const Real iv = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(var) + eps));
      invstd.At(ch) = iv;
      for (int64_t r = 0; r < m; ++r) {
        const Real xh = (xv.data[static_cast<size_t>(r * c + ch)] - mean) * iv;
        xhat.data[static_cast<size_t>(r * c + ch)] = xh;
        out.data[static_cast<size_t>(r * c + ch)] = gv.At(ch) * xh + bv.At(ch);
      }
      auto& rm = running_mean.MutableValue();
      auto& rv = running_var.MutableValue();
      rm.At(ch) = (Real(1) - momentum) * rm.At(ch) + momentum * mean;
      rv.At(ch) = (Real(1) - momentum) * rv.At(ch) + momentum * var;
    }
    TensorT<Real> gs = gv;
    return VarT<Real>::FromOp(
        std::move(out), {x, gamma, beta},
        [xhat, invstd, gs, m, c](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
          for (int64_t ch = 0; ch < c; ++ch) {
            // Double accumulators: the (M*dxhat - sums) form cancels heavily.
            double sum_dxhat = 0, sum_dxhat_xhat = 0, sum_g = 0, sum_g_xhat = 0;
            for (int64_t r = 0; r < m; ++r) {
              const double gi = g.data[static_cast<size_t>(r * c + ch)];
              const double dxh = gi * gs.At(ch);
              sum_dxhat += dxh;
              sum_dxhat_xhat += dxh * xhat.data[static_cast<size_t>(r * c + ch)];
              sum_g += gi;
              sum_g_xhat += gi * xhat.data[static_cast<size_t>(r * c + ch)];
            }
            for (int64_t r = 0; r < m; ++r) {
              const double gi = g.data[static_cast<size_t>(r * c + ch)];
              const double dxh = gi * gs.At(ch);
              const double xh = xhat.data[static_cast<size_t>(r * c + ch)];
              detail::AddInto(gp[0], r * c + ch,
                              static_cast<Real>(invstd.At(ch) / static_cast<double>(m) *
                                  (static_cast<double>(m) * dxh - sum_dxhat -
                                   xh * sum_dxhat_xhat)));
            }
            detail::AddInto(gp[1], ch, static_cast<Real>(sum_g_xhat));
            detail::AddInto(gp[2], ch, static_cast<Real>(sum_g));
          }
        });
  }

  // Eval path: normalize by frozen running statistics.
  const auto& rm = running_mean.Value();
  const auto& rv = running_var.Value();
  for (int64_t ch = 0; ch < c; ++ch) invstd.At(ch) = Real(1) / std::sqrt(rv.At(ch) + eps);
  for (int64_t r = 0; r < m; ++r) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const Real xh = (xv.data[static_cast<size_t>(r * c + ch)] - rm.At(ch)) * invstd.At(ch);
      xhat.data[static_cast<size_t>(r * c + ch)] = xh;
      out.data[static_cast<size_t>(r * c + ch)] = gv.At(ch) * xh + bv.At(ch);
    }
  }
  TensorT<Real> gs = gv;
  return VarT<Real>::FromOp(
      std::move(out), {x, gamma, beta},
      [xhat, invstd, gs, m, c](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t ch = 0; ch < c; ++ch) {
          double sum_g = 0, sum_g_xhat = 0;
          for (int64_t r = 0; r < m; ++r) {
            const Real gi = g.data[static_cast<size_t>(r * c + ch)];
            sum_g += gi;
            sum_g_xhat += static_cast<double>(gi) * xhat.data[static_cast<size_t>(r * c + ch)];
            detail::AddInto(gp[0], r * c + ch, gi * gs.At(ch) * invstd.At(ch));
          }
          detail::AddInto(gp[1], ch, static_cast<Real>(sum_g_xhat));
          detail::AddInto(gp[2], ch, static_cast<Real>(sum_g));
        }
      });
}

// Inverted dropout: train mode zeroes with probability p and scales survivors
// by 1/(1-p); eval mode is the identity.
template <typename Real>
VarT<Real> Dropout(const VarT<Real>& x, Real p, Mode mode, Rng& rng) {
  if (p < Real(0) || p >= Real(1))
    throw ConfigError("dropout probability must be in [0,1), got " + std::to_string(p));
  if (mode == Mode::kEval || p == Real(0)) return x;
  const Real keep_scale = Real(1) / (Real(1) - p);
  TensorT<Real> mask(x.Value().shape);
  for (auto& v : mask.data)
    v = rng.Uniform() < static_cast<double>(p) ? Real(0) : keep_scale;
  TensorT<Real> out = x.Value();
  for (int64_t i = 0; i < out.Numel(); ++i) out.At(i) *= mask.At(i);
  return VarT<Real>::FromOp(std::move(out), {x},
                            [mask](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
                              for (int64_t i = 0; i < g.Numel(); ++i)
                                detail::AddInto(gp[0], i, g.At(i) * mask.At(i));
                            });
}

// Uniform +-sqrt(6/(fan_in+fan_out)) initialization.
template <typename Real>
void InitUniform(TensorT<Real>& t, int64_t fan_in, int64_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data) v = static_cast<Real>(rng.UniformRange(-limit, limit));
}

}  // namespace lid

#endif  // LID_NN_H_

// lid/model.h

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

#ifndef LID_MODEL_H_
#define LID_MODEL_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lid/autodiff.h"
#include "lid/error.h"
#include "lid/nn.h"
#include "lid/rng.h"
#include "lid/tensor.h"

namespace lid {

// Encoder architecture. Defaults follow the 15x5 layout at 512 channels,
// stride 1, dilation 1 throughout. The kernel schedule has one entry per
// block; the prologue reuses the first entry.
struct EncoderConfig {
  int blocks = 15;
  int subblocks = 5;
  int channels = 512;
  int in_dim = 40;
  std::vector<int> kernel_schedule = {33, 33, 33, 39, 39, 39, 51, 51,
                                      51, 63, 63, 63, 75, 75, 75};
  float dropout_p = 0.2f;
  bool separable = true;

  void Validate() const {
    if (blocks < 1 || subblocks < 1 || channels < 1 || in_dim < 1)
      throw ConfigError("encoder config: blocks/subblocks/channels must be >= 1");
    if (static_cast<int>(kernel_schedule.size()) != blocks)
      throw ConfigError("encoder config: kernel schedule has " +
                        std::to_string(kernel_schedule.size()) + " entries for " +
                        std::to_string(blocks) + " blocks");
    for (int k : kernel_schedule)
      if (k < 1 || k % 2 == 0)
        throw ConfigError("encoder config: kernel sizes must be odd and >= 1");
    if (dropout_p < 0.f || dropout_p >= 1.f)
      throw ConfigError("encoder config: dropout must be in [0,1)");
  }
};

template <typename Real>
struct ParameterT {
  std::string name;
  VarT<Real> node;
  bool trainable = true;
};

// Time-channel separable conv layer (depthwise + pointwise), or a full
// cross-channel kernel when separable is off. No bias; batch norm follows.
template <typename Real>
struct ConvLayerT {
  bool separable = true;
  VarT<Real> depthwise;  // [C_in x K]
  VarT<Real> pointwise;  // [C_in x C_out]
  VarT<Real> full;       // [C_out x C_in x K]

  VarT<Real> Forward(const VarT<Real>& x) const {
    if (separable) return Affine(DepthwiseConv1d(x, depthwise), pointwise);
    return Conv1dFull(x, full);
  }
};

template <typename Real>
struct BatchNormLayerT {
  VarT<Real> gamma, beta;
  VarT<Real> running_mean, running_var;  // non-trainable state
  Real eps = Real(1e-5);
  Real momentum = Real(0.1);

  VarT<Real> Forward(const VarT<Real>& x, Mode mode) {
    return BatchNorm(x, gamma, beta, running_mean, running_var, eps, momentum, mode);
  }
};

template <typename Real>
struct SubBlockT {
  ConvLayerT<Real> conv;
  BatchNormLayerT<Real> bn;
};

template <typename Real>
struct BlockT {
  std::vector<SubBlockT<Real>> subs;
  VarT<Real> res_pointwise;  // [C x C] residual projection
  BatchNormLayerT<Real> res_bn;
};

template <typename Real>
struct SapParamsT {
  VarT<Real> w;   // [C x A]
  VarT<Real> b;   // [A]
  VarT<Real> mu;  // [A]
};

template <typename Real>
struct ClassifierT {
  VarT<Real> w;  // [C x n_classes]
  VarT<Real> b;  // [n_classes]
};

// Self-attentive pooling over one utterance: h_t = tanh(W x_t + b), scores
// against the context vector, masked softmax, weighted sum of frames.
// Returns the embedding and the attention weights.
template <typename Real>
std::pair<VarT<Real>, VarT<Real>> SapForward(const VarT<Real>& frames,
                                             const std::vector<uint8_t>& valid,
                                             const SapParamsT<Real>& params) {
  const auto& fv = frames.Value();
  if (fv.Rank() != 2)
    throw DimensionError("sap_forward expects [TxC] frames, got " + fv.ShapeStr());
  const int64_t t = fv.shape[0];
  if (static_cast<int64_t>(valid.size()) != t)
    throw DimensionError("sap_forward: valid mask length " +
                         std::to_string(valid.size()) + " vs T=" + std::to_string(t));
  bool any = false;
  for (uint8_t v : valid) any = any || (v != 0);
  if (!any) throw DimensionError("sap_forward: no valid frames");

  VarT<Real> h = Tanh(Affine(frames, params.w, params.b));
  VarT<Real> scores = Reshape(MatVec(h, params.mu), {1, t});
  VarT<Real> weights = Reshape(SoftmaxRows(scores, &valid), {t});
  VarT<Real> e = WeightedSum(frames, weights);
  return {e, weights};
}

// Whole model: prologue conv + B residual blocks, SAP, linear classifier.
template <typename Real>
class LidModelT {
 public:
  LidModelT() = default;

  LidModelT(const EncoderConfig& cfg, int attention_dim, int n_classes, Rng& rng) {
    Init(cfg, attention_dim, n_classes, rng);
  }

  void Init(const EncoderConfig& cfg, int attention_dim, int n_classes, Rng& rng) {
    cfg.Validate();
    if (attention_dim < 1 || n_classes < 2)
      throw ConfigError("model: attention_dim >= 1 and n_classes >= 2 required");
    cfg_ = cfg;
    attention_dim_ = attention_dim;
    n_classes_ = n_classes;
    params_.clear();

    prologue_ = MakeConv(cfg.in_dim, cfg.channels, cfg.kernel_schedule[0],
                         "encoder.prologue", rng);
    prologue_bn_ = MakeBn(cfg.channels, "encoder.prologue.bn");
    blocks_.clear();
    for (int b = 0; b < cfg.blocks; ++b) {
      BlockT<Real> block;
      const std::string bp = "encoder.block" + std::to_string(b);
      for (int r = 0; r < cfg.subblocks; ++r) {
        SubBlockT<Real> sub;
        const std::string sp = bp + ".sub" + std::to_string(r);
        sub.conv = MakeConv(cfg.channels, cfg.channels, cfg.kernel_schedule[static_cast<size_t>(b)],
                            sp, rng);
        sub.bn = MakeBn(cfg.channels, sp + ".bn");
        block.subs.push_back(std::move(sub));
      }
      TensorT<Real> rp({cfg.channels, cfg.channels});
      InitUniform(rp, cfg.channels, cfg.channels, rng);
      block.res_pointwise = Register(bp + ".res.pointwise", std::move(rp), true);
      block.res_bn = MakeBn(cfg.channels, bp + ".res.bn");
      blocks_.push_back(std::move(block));
    }

    TensorT<Real> sw({cfg.channels, attention_dim});
    InitUniform(sw, cfg.channels, attention_dim, rng);
    sap_.w = Register("sap.w", std::move(sw), true);
    sap_.b = Register("sap.b", TensorT<Real>({attention_dim}), true);
    TensorT<Real> mu({attention_dim});
    const double sigma = 1.0 / std::sqrt(static_cast<double>(attention_dim));
    for (auto& v : mu.data) v = static_cast<Real>(sigma * rng.Gaussian());
    sap_.mu = Register("sap.mu", std::move(mu), true);

    TensorT<Real> cw({cfg.channels, n_classes});
    InitUniform(cw, cfg.channels, n_classes, rng);
    cls_.w = Register("classifier.w", std::move(cw), true);
    cls_.b = Register("classifier.b", TensorT<Real>({n_classes}), true);
  }

  const EncoderConfig& Config() const { return cfg_; }
  int AttentionDim() const { return attention_dim_; }
  int NumClasses() const { return n_classes_; }

  std::vector<ParameterT<Real>>& Params() { return params_; }
  const std::vector<ParameterT<Real>>& Params() const { return params_; }

  ParameterT<Real>* FindParam(const std::string& name) {
    for (auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  void ZeroGrads() {
    for (auto& p : params_) p.node.ZeroGrad();
  }

  // One residual block: R sub-blocks of conv/bn/relu/dropout, with the
  // block input joining through a pointwise-conv+bn branch after the last
  // sub-block's batch norm and before its final relu and dropout.
  VarT<Real> BlockForward(const VarT<Real>& x, BlockT<Real>& block, Mode mode, Rng& rng) {
    VarT<Real> res = block.res_bn.Forward(Affine(x, block.res_pointwise), mode);
    VarT<Real> h = x;
    const size_t last = block.subs.size() - 1;
    for (size_t r = 0; r < block.subs.size(); ++r) {
      h = block.subs[r].bn.Forward(block.subs[r].conv.Forward(h), mode);
      if (r == last) h = Add(h, res);
      h = Relu(h);
      h = Dropout(h, Real(cfg_.dropout_p), mode, rng);
    }
    return h;
  }

  // [NxTx40] or [Tx40] features -> frame-level representations at C channels.
  VarT<Real> EncoderForward(const VarT<Real>& features, Mode mode, Rng& rng) {
    const auto& fv = features.Value();
    if (fv.shape.back() != cfg_.in_dim)
      throw DimensionError("encoder: expected feature dim " +
                           std::to_string(cfg_.in_dim) + ", got " + fv.ShapeStr());
    VarT<Real> h = Relu(prologue_bn_.Forward(prologue_.Forward(features), mode));
    for (auto& block : blocks_) h = BlockForward(h, block, mode, rng);
    return h;
  }

  VarT<Real> Classify(const VarT<Real>& embedding) const {
    return Affine(embedding, cls_.w, cls_.b);
  }

  // Full forward over a padded batch; valid is row-major [N x T].
  // Returns logits [N x n_classes].
  VarT<Real> Forward(const VarT<Real>& batch, const std::vector<std::vector<uint8_t>>& valid,
                     Mode mode, Rng& rng) {
    const auto& bv = batch.Value();
    if (bv.Rank() != 3)
      throw DimensionError("model forward expects [NxTxF], got " + bv.ShapeStr());
    const int64_t n = bv.shape[0];
    if (static_cast<int64_t>(valid.size()) != n)
      throw DimensionError("model forward: mask count does not match batch");
    VarT<Real> encoded = EncoderForward(batch, mode, rng);
    std::vector<VarT<Real>> embeddings;
    embeddings.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      auto [e, w] = SapForward(SliceBatch(encoded, i), valid[static_cast<size_t>(i)], sap_);
      embeddings.push_back(std::move(e));
    }
    return Classify(StackRows(embeddings));
  }

  SapParamsT<Real>& Sap() { return sap_; }
  ClassifierT<Real>& Classifier() { return cls_; }
  ConvLayerT<Real>& Prologue() { return prologue_; }
  BatchNormLayerT<Real>& PrologueBn() { return prologue_bn_; }
  std::vector<BlockT<Real>>& Blocks() { return blocks_; }

 private:
  VarT<Real> Register(const std::string& name, TensorT<Real> value, bool trainable) {
    for (const auto& p : params_)
      if (p.name == name) throw ConfigError("duplicate parameter name: " + name);
    VarT<Real> v(std::move(value), trainable);
    params_.push_back(ParameterT<Real>{name, v, trainable});
    return v;
  }

  ConvLayerT<Real> MakeConv(int cin, int cout, int k, const std::string& prefix, Rng& rng) {
    ConvLayerT<Real> layer;
    layer.separable = cfg_.separable;
    if (layer.separable) {
      TensorT<Real> dw({cin, k});
      InitUniform(dw, static_cast<int64_t>(k), static_cast<int64_t>(k), rng);
      layer.depthwise = Register(prefix + ".depthwise", std::move(dw), true);
      TensorT<Real> pw({cin, cout});
      InitUniform(pw, cin, cout, rng);
      layer.pointwise = Register(prefix + ".pointwise", std::move(pw), true);
    } else {
      TensorT<Real> fk({cout, cin, k});
      InitUniform(fk, static_cast<int64_t>(cin) * k, static_cast<int64_t>(cout) * k, rng);
      layer.full = Register(prefix + ".kernel", std::move(fk), true);
    }
    return layer;
  }

  BatchNormLayerT<Real> MakeBn(int c, const std::string& prefix) {
    BatchNormLayerT<Real> bn;
    bn.gamma = Register(prefix + ".gamma", TensorT<Real>::Full({c}, Real(1)), true);
    bn.beta = Register(prefix + ".beta", TensorT<Real>({c}), true);
    bn.running_mean = Register(prefix + ".running_mean", TensorT<Real>({c}), false);
    bn.running_var = Register(prefix + ".running_var", TensorT<Real>::Full({c}, Real(1)), false);
    return bn;
  }

  EncoderConfig cfg_;
  int attention_dim_ = 256;
  int n_classes_ = 16;
  ConvLayerT<Real> prologue_;
  BatchNormLayerT<Real> prologue_bn_;
  std::vector<BlockT<Real>> blocks_;
  SapParamsT<Real> sap_;
  ClassifierT<Real> cls_;
  std::vector<ParameterT<Real>> params_;
};

using LidModel = LidModelT<float>;

}  // namespace lid

#endif  // LID_MODEL_H_

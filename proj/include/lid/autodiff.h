// lid/autodiff.h

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

#ifndef LID_AUTODIFF_H_
#define LID_AUTODIFF_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lid/error.h"
#include "lid/tensor.h"

namespace lid {

// Reverse-mode differentiation over TensorT values. Each op records a node
// holding the forward value and a closure that scatters an incoming gradient
// to the op's inputs. Backward runs with pass-local gradient buffers and then
// adds the pass result into each node's persistent grad, so calling backward
// twice without zeroing accumulates exactly twice the gradient.
//
// A graph is confined to one thread; VarT handles are cheap shared references.
template <typename Real>
class VarT {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<Node>;
  // Scatters gout into pre-zeroed pass-local buffers, one per parent.
  using BackFn =
      std::function<void(const TensorT<Real>& gout, std::vector<TensorT<Real>*>& gparents)>;

  struct Node {
    TensorT<Real> value;
    TensorT<Real> grad;  // lazily materialized, persistent across passes
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    BackFn backprop;  // empty for leaves
  };

  VarT() = default;

  explicit VarT(TensorT<Real> value, bool requires_grad = false) {
    node_ = std::make_shared<Node>();
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  static VarT FromOp(TensorT<Real> value, std::vector<VarT> parents, BackFn fn) {
    VarT v;
    v.node_ = std::make_shared<Node>();
    v.node_->value = std::move(value);
    bool needs = false;
    for (auto& p : parents) {
      v.node_->parents.push_back(p.node_);
      needs = needs || p.node_->requires_grad;
    }
    v.node_->requires_grad = needs;
    if (needs) v.node_->backprop = std::move(fn);
    return v;
  }

  bool Defined() const { return node_ != nullptr; }
  const TensorT<Real>& Value() const { return node_->value; }
  TensorT<Real>& MutableValue() { return node_->value; }
  bool RequiresGrad() const { return node_->requires_grad; }

  // Materializes a zero gradient on first access.
  const TensorT<Real>& Grad() const {
    if (node_->grad.Numel() == 0) node_->grad = TensorT<Real>(node_->value.shape);
    return node_->grad;
  }

  void ZeroGrad() { node_->grad = TensorT<Real>(); }

  NodePtr RawNode() const { return node_; }

  // Propagates d(this)/d(everything reachable); this must be scalar.
  void Backward() const {
    if (!node_) throw DimensionError("backward on an undefined variable");
    if (node_->value.Numel() != 1)
      throw DimensionError("backward requires a scalar loss, got shape " +
                           node_->value.ShapeStr());
    std::vector<Node*> order = TopoOrder(node_.get());
    std::unordered_map<Node*, TensorT<Real>> pass;
    pass[node_.get()] = TensorT<Real>::Scalar(Real(1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* n = *it;
      if (!n->requires_grad || !n->backprop) continue;
      auto found = pass.find(n);
      if (found == pass.end()) continue;
      std::vector<TensorT<Real>*> gparents(n->parents.size(), nullptr);
      for (size_t i = 0; i < n->parents.size(); ++i) {
        Node* p = n->parents[i].get();
        if (!p->requires_grad) continue;
        auto [slot, inserted] = pass.try_emplace(p);
        if (inserted) slot->second = TensorT<Real>(p->value.shape);
        gparents[i] = &slot->second;
      }
      n->backprop(found->second, gparents);
    }
    for (Node* n : order) {
      if (!n->requires_grad) continue;
      auto found = pass.find(n);
      if (found == pass.end()) continue;
      if (n->grad.Numel() == 0) n->grad = TensorT<Real>(n->value.shape);
      for (int64_t i = 0; i < n->grad.Numel(); ++i)
        n->grad.data[static_cast<size_t>(i)] += found->second.data[static_cast<size_t>(i)];
    }
  }

 private:
  static std::vector<Node*> TopoOrder(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> done;
    // Iterative post-order DFS; graphs can be deep for long utterances.
    std::vector<std::pair<Node*, size_t>> stack;
    std::unordered_set<Node*> on_stack;
    stack.emplace_back(root, 0);
    on_stack.insert(root);
    while (!stack.empty()) {
      auto& [n, idx] = stack.back();
      if (idx < n->parents.size()) {
        Node* p = n->parents[idx++].get();
        if (!done.count(p)) {
          if (on_stack.count(p))
            throw DimensionError("differentiation graph has a cycle");
          stack.emplace_back(p, 0);
          on_stack.insert(p);
        }
      } else {
        done.insert(n);
        on_stack.erase(n);
        order.push_back(n);
        stack.pop_back();
      }
    }
    return order;
  }

  NodePtr node_;
};

using Var = VarT<float>;

namespace detail {

template <typename Real>
void AddInto(TensorT<Real>* dst, int64_t i, Real v) {
  if (dst) dst->data[static_cast<size_t>(i)] += v;
}

// Leading dims collapse to rows; last dim is the feature axis.
inline int64_t RowsOf(const std::vector<int64_t>& shape) {
  int64_t rows = 1;
  for (size_t i = 0; i + 1 < shape.size(); ++i) rows *= shape[i];
  return rows;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and reduction ops
// ---------------------------------------------------------------------------

template <typename Real>
VarT<Real> Add(const VarT<Real>& a, const VarT<Real>& b) {
  if (!a.Value().SameShape(b.Value()))
    throw DimensionError("add: shape mismatch " + a.Value().ShapeStr() + " vs " +
                         b.Value().ShapeStr());
  TensorT<Real> out = a.Value();
  for (int64_t i = 0; i < out.Numel(); ++i) out.At(i) += b.Value().At(i);
  return VarT<Real>::FromOp(std::move(out), {a, b},
                            [](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
                              for (int64_t i = 0; i < g.Numel(); ++i) {
                                detail::AddInto(gp[0], i, g.At(i));
                                detail::AddInto(gp[1], i, g.At(i));
                              }
                            });
}

template <typename Real>
VarT<Real> Mul(const VarT<Real>& a, const VarT<Real>& b) {
  if (!a.Value().SameShape(b.Value()))
    throw DimensionError("mul: shape mismatch " + a.Value().ShapeStr() + " vs " +
                         b.Value().ShapeStr());
  TensorT<Real> out = a.Value();
  for (int64_t i = 0; i < out.Numel(); ++i) out.At(i) *= b.Value().At(i);
  TensorT<Real> av = a.Value(), bv = b.Value();
  return VarT<Real>::FromOp(
      std::move(out), {a, b},
      [av, bv](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t i = 0; i < g.Numel(); ++i) {
          detail::AddInto(gp[0], i, g.At(i) * bv.At(i));
          detail::AddInto(gp[1], i, g.At(i) * av.At(i));
        }
      });
}

template <typename Real>
VarT<Real> Scale(const VarT<Real>& a, Real c) {
  TensorT<Real> out = a.Value();
  for (auto& v : out.data) v *= c;
  return VarT<Real>::FromOp(std::move(out), {a},
                            [c](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
                              for (int64_t i = 0; i < g.Numel(); ++i)
                                detail::AddInto(gp[0], i, g.At(i) * c);
                            });
}

template <typename Real>
VarT<Real> Sum(const VarT<Real>& a) {
  Real s = 0;
  for (Real v : a.Value().data) s += v;
  return VarT<Real>::FromOp(TensorT<Real>::Scalar(s), {a},
                            [](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
                              if (!gp[0]) return;
                              for (auto& v : gp[0]->data) v += g.At(0);
                            });
}

template <typename Real>
VarT<Real> Tanh(const VarT<Real>& a) {
  TensorT<Real> out = a.Value();
  for (auto& v : out.data) v = std::tanh(v);
  TensorT<Real> saved = out;
  return VarT<Real>::FromOp(
      std::move(out), {a},
      [saved](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t i = 0; i < g.Numel(); ++i)
          detail::AddInto(gp[0], i, g.At(i) * (Real(1) - saved.At(i) * saved.At(i)));
      });
}

// Subgradient at 0 is 0.
template <typename Real>
VarT<Real> Relu(const VarT<Real>& a) {
  TensorT<Real> out = a.Value();
  for (auto& v : out.data) v = v > Real(0) ? v : Real(0);
  TensorT<Real> av = a.Value();
  return VarT<Real>::FromOp(
      std::move(out), {a},
      [av](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t i = 0; i < g.Numel(); ++i)
          detail::AddInto(gp[0], i, av.At(i) > Real(0) ? g.At(i) : Real(0));
      });
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

// x[...xC_in] * W[C_in x C_out] + b[C_out]; leading dims of x are rows.
template <typename Real>
VarT<Real> Affine(const VarT<Real>& x, const VarT<Real>& w, const VarT<Real>& b) {
  const auto& xv = x.Value();
  const auto& wv = w.Value();
  if (wv.Rank() != 2 || xv.shape.back() != wv.shape[0])
    throw DimensionError("affine: shape mismatch " + xv.ShapeStr() + " vs " +
                         wv.ShapeStr());
  const int64_t rows = detail::RowsOf(xv.shape);
  const int64_t cin = wv.shape[0], cout = wv.shape[1];
  const bool with_bias = b.Defined();
  if (with_bias && (b.Value().Rank() != 1 || b.Value().shape[0] != cout))
    throw DimensionError("affine: bias shape " + b.Value().ShapeStr() +
                         " does not match " + wv.ShapeStr());
  std::vector<int64_t> oshape = xv.shape;
  oshape.back() = cout;
  TensorT<Real> out(oshape);
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t j = 0; j < cout; ++j) {
      Real acc = with_bias ? b.Value().At(j) : Real(0);
      for (int64_t i = 0; i < cin; ++i)
        acc += xv.data[static_cast<size_t>(r * cin + i)] * wv.At(i, j);
      out.data[static_cast<size_t>(r * cout + j)] = acc;
    }
  }
  TensorT<Real> xs = xv, ws = wv;
  std::vector<VarT<Real>> parents = {x, w};
  if (with_bias) parents.push_back(b);
  return VarT<Real>::FromOp(
      std::move(out), std::move(parents),
      [xs, ws, rows, cin, cout](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t r = 0; r < rows; ++r) {
          for (int64_t j = 0; j < cout; ++j) {
            const Real gv = g.data[static_cast<size_t>(r * cout + j)];
            if (gv == Real(0)) continue;
            for (int64_t i = 0; i < cin; ++i) {
              detail::AddInto(gp[0], r * cin + i, gv * ws.At(i, j));
              detail::AddInto(gp[1], i * cout + j,
                              gv * xs.data[static_cast<size_t>(r * cin + i)]);
            }
            if (gp.size() > 2) detail::AddInto(gp[2], j, gv);
          }
        }
      });
}

template <typename Real>
VarT<Real> Affine(const VarT<Real>& x, const VarT<Real>& w) {
  return Affine(x, w, VarT<Real>());
}

// h[...xA] . mu[A] -> one score per leading row.
template <typename Real>
VarT<Real> MatVec(const VarT<Real>& h, const VarT<Real>& mu) {
  const auto& hv = h.Value();
  const auto& mv = mu.Value();
  if (mv.Rank() != 1 || hv.shape.back() != mv.shape[0])
    throw DimensionError("matvec: shape mismatch " + hv.ShapeStr() + " vs " +
                         mv.ShapeStr());
  const int64_t rows = detail::RowsOf(hv.shape);
  const int64_t dim = mv.shape[0];
  std::vector<int64_t> oshape(hv.shape.begin(), hv.shape.end() - 1);
  if (oshape.empty()) oshape.push_back(1);
  TensorT<Real> out(oshape);
  for (int64_t r = 0; r < rows; ++r) {
    Real acc = 0;
    for (int64_t i = 0; i < dim; ++i)
      acc += hv.data[static_cast<size_t>(r * dim + i)] * mv.At(i);
    out.At(r) = acc;
  }
  TensorT<Real> hs = hv, ms = mv;
  return VarT<Real>::FromOp(
      std::move(out), {h, mu},
      [hs, ms, rows, dim](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t r = 0; r < rows; ++r) {
          const Real gv = g.At(r);
          for (int64_t i = 0; i < dim; ++i) {
            detail::AddInto(gp[0], r * dim + i, gv * ms.At(i));
            detail::AddInto(gp[1], i, gv * hs.data[static_cast<size_t>(r * dim + i)]);
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Softmax / attention pieces
// ---------------------------------------------------------------------------

// Row softmax with optional validity mask (row-major N*K flags). Masked
// entries get weight exactly 0. Always subtracts the row max first.
template <typename Real>
VarT<Real> SoftmaxRows(const VarT<Real>& x, const std::vector<uint8_t>* mask = nullptr) {
  const auto& xv = x.Value();
  if (xv.Rank() != 2)
    throw DimensionError("softmax_rows expects a rank-2 tensor, got " + xv.ShapeStr());
  const int64_t n = xv.shape[0], k = xv.shape[1];
  if (mask && static_cast<int64_t>(mask->size()) != n * k)
    throw DimensionError("softmax_rows: mask length does not match tensor");
  TensorT<Real> out(xv.shape);
  for (int64_t r = 0; r < n; ++r) {
    Real mx = -std::numeric_limits<Real>::infinity();
    for (int64_t j = 0; j < k; ++j)
      if (!mask || (*mask)[static_cast<size_t>(r * k + j)])
        mx = std::max(mx, xv.At(r, j));
    if (!std::isfinite(mx))
      throw DimensionError("softmax_rows: row " + std::to_string(r) +
                           " is fully masked");
    Real denom = 0;
    for (int64_t j = 0; j < k; ++j) {
      if (!mask || (*mask)[static_cast<size_t>(r * k + j)]) {
        out.At(r, j) = std::exp(xv.At(r, j) - mx);
        denom += out.At(r, j);
      } else {
        out.At(r, j) = Real(0);
      }
    }
    for (int64_t j = 0; j < k; ++j) out.At(r, j) /= denom;
  }
  TensorT<Real> saved = out;
  return VarT<Real>::FromOp(
      std::move(out), {x},
      [saved, n, k](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        // dx_j = w_j * (g_j - sum_i w_i g_i); masked entries have w=0.
        for (int64_t r = 0; r < n; ++r) {
          Real dot = 0;
          for (int64_t j = 0; j < k; ++j) dot += saved.At(r, j) * g.At(r, j);
          for (int64_t j = 0; j < k; ++j)
            detail::AddInto(gp[0], r * k + j, saved.At(r, j) * (g.At(r, j) - dot));
        }
      });
}

// e[c] = sum_t w[t] * x[t,c]
template <typename Real>
VarT<Real> WeightedSum(const VarT<Real>& x, const VarT<Real>& w) {
  const auto& xv = x.Value();
  const auto& wv = w.Value();
  if (xv.Rank() != 2 || wv.Rank() != 1 || xv.shape[0] != wv.shape[0])
    throw DimensionError("weighted_sum: shape mismatch " + xv.ShapeStr() + " vs " +
                         wv.ShapeStr());
  const int64_t t = xv.shape[0], c = xv.shape[1];
  TensorT<Real> out({c});
  for (int64_t i = 0; i < t; ++i)
    for (int64_t j = 0; j < c; ++j) out.At(j) += wv.At(i) * xv.At(i, j);
  TensorT<Real> xs = xv, ws = wv;
  return VarT<Real>::FromOp(
      std::move(out), {x, w},
      [xs, ws, t, c](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t i = 0; i < t; ++i) {
          Real acc = 0;
          for (int64_t j = 0; j < c; ++j) {
            detail::AddInto(gp[0], i * c + j, ws.At(i) * g.At(j));
            acc += xs.At(i, j) * g.At(j);
          }
          detail::AddInto(gp[1], i, acc);
        }
      });
}

// Stacks N rank-1 vectors of equal length into [N x C].
template <typename Real>
VarT<Real> StackRows(const std::vector<VarT<Real>>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows: empty input");
  const int64_t c = rows[0].Value().Numel();
  const int64_t n = static_cast<int64_t>(rows.size());
  TensorT<Real> out({n, c});
  for (int64_t r = 0; r < n; ++r) {
    if (rows[static_cast<size_t>(r)].Value().Numel() != c)
      throw DimensionError("stack_rows: ragged rows");
    for (int64_t j = 0; j < c; ++j)
      out.At(r, j) = rows[static_cast<size_t>(r)].Value().At(j);
  }
  return VarT<Real>::FromOp(std::move(out), rows,
                            [n, c](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
                              for (int64_t r = 0; r < n; ++r)
                                for (int64_t j = 0; j < c; ++j)
                                  detail::AddInto(gp[static_cast<size_t>(r)], j, g.At(r, j));
                            });
}

// Extracts utterance n from a padded batch [N x T x C] -> [T x C].
template <typename Real>
VarT<Real> SliceBatch(const VarT<Real>& x, int64_t n) {
  const auto& xv = x.Value();
  if (xv.Rank() != 3 || n < 0 || n >= xv.shape[0])
    throw DimensionError("slice_batch: bad index for " + xv.ShapeStr());
  const int64_t t = xv.shape[1], c = xv.shape[2];
  TensorT<Real> out({t, c});
  for (int64_t i = 0; i < t; ++i)
    for (int64_t j = 0; j < c; ++j) out.At(i, j) = xv.At(n, i, j);
  return VarT<Real>::FromOp(
      std::move(out), {x},
      [n, t, c](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        if (!gp[0]) return;
        for (int64_t i = 0; i < t; ++i)
          for (int64_t j = 0; j < c; ++j) gp[0]->At(n, i, j) += g.At(i, j);
      });
}

// Same data, new shape; element count must match.
template <typename Real>
VarT<Real> Reshape(const VarT<Real>& x, std::vector<int64_t> shape) {
  TensorT<Real> out(std::move(shape), x.Value().data);
  return VarT<Real>::FromOp(std::move(out), {x},
                            [](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
                              if (!gp[0]) return;
                              for (int64_t i = 0; i < g.Numel(); ++i)
                                gp[0]->At(i) += g.At(i);
                            });
}

// ---------------------------------------------------------------------------
// Cross-entropy
// ---------------------------------------------------------------------------

// -log softmax(logits)[label], log-sum-exp with max subtraction.
template <typename Real>
VarT<Real> CrossEntropy(const VarT<Real>& logits, int label) {
  const auto& lv = logits.Value();
  if (lv.Rank() != 1)
    throw DimensionError("cross_entropy expects rank-1 logits, got " + lv.ShapeStr());
  const int64_t k = lv.shape[0];
  if (label < 0 || label >= k)
    throw DimensionError("cross_entropy: label " + std::to_string(label) +
                         " out of range [0," + std::to_string(k) + ")");
  Real mx = lv.At(0);
  for (int64_t j = 1; j < k; ++j) mx = std::max(mx, lv.At(j));
  Real lse = 0;
  for (int64_t j = 0; j < k; ++j) lse += std::exp(lv.At(j) - mx);
  lse = std::log(lse) + mx;
  TensorT<Real> probs({k});
  for (int64_t j = 0; j < k; ++j) probs.At(j) = std::exp(lv.At(j) - lse);
  const Real loss = lse - lv.At(label);
  return VarT<Real>::FromOp(
      TensorT<Real>::Scalar(loss), {logits},
      [probs, label, k](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        for (int64_t j = 0; j < k; ++j)
          detail::AddInto(gp[0], j,
                          g.At(0) * (probs.At(j) - (j == label ? Real(1) : Real(0))));
      });
}

// Mean cross-entropy over a batch of logits [N x K].
template <typename Real>
VarT<Real> CrossEntropyMean(const VarT<Real>& logits, const std::vector<int>& labels) {
  const auto& lv = logits.Value();
  if (lv.Rank() != 2 || static_cast<int64_t>(labels.size()) != lv.shape[0])
    throw DimensionError("cross_entropy_mean: logits " + lv.ShapeStr() +
                         " vs " + std::to_string(labels.size()) + " labels");
  const int64_t n = lv.shape[0], k = lv.shape[1];
  TensorT<Real> probs(lv.shape);
  Real total = 0;
  for (int64_t r = 0; r < n; ++r) {
    const int label = labels[static_cast<size_t>(r)];
    if (label < 0 || label >= k)
      throw DimensionError("cross_entropy_mean: label out of range at row " +
                           std::to_string(r));
    Real mx = lv.At(r, 0);
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, lv.At(r, j));
    Real lse = 0;
    for (int64_t j = 0; j < k; ++j) lse += std::exp(lv.At(r, j) - mx);
    lse = std::log(lse) + mx;
    for (int64_t j = 0; j < k; ++j) probs.At(r, j) = std::exp(lv.At(r, j) - lse);
    total += lse - lv.At(r, label);
  }
  std::vector<int> ls = labels;
  return VarT<Real>::FromOp(
      TensorT<Real>::Scalar(total / Real(n)), {logits},
      [probs, ls, n, k](const TensorT<Real>& g, std::vector<TensorT<Real>*>& gp) {
        const Real scale = g.At(0) / Real(n);
        for (int64_t r = 0; r < n; ++r)
          for (int64_t j = 0; j < k; ++j)
            detail::AddInto(gp[0], r * k + j,
                            scale * (probs.At(r, j) -
                                     (j == ls[static_cast<size_t>(r)] ? Real(1) : Real(0))));
      });
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

// Compares reverse-mode gradients against central finite differences,
// accumulating differences in double. Returns the worst relative error over
// all parameter coordinates; denominators are floored at 1 so near-zero
// gradients are compared absolutely.
template <typename Real>
double GradCheck(const std::function<VarT<Real>()>& f,
                 const std::vector<VarT<Real>>& params, Real eps) {
  if (!(eps > Real(0))) throw DimensionError("grad_check: eps must be positive");
  for (const auto& p : params) const_cast<VarT<Real>&>(p).ZeroGrad();
  VarT<Real> loss = f();
  loss.Backward();
  std::vector<TensorT<Real>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.Grad());

  double worst = 0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    TensorT<Real>& value = const_cast<VarT<Real>&>(params[pi]).MutableValue();
    for (int64_t i = 0; i < value.Numel(); ++i) {
      const Real saved = value.At(i);
      value.At(i) = saved + eps;
      const double up = static_cast<double>(f().Value().At(0));
      value.At(i) = saved - eps;
      const double down = static_cast<double>(f().Value().At(0));
      value.At(i) = saved;
      const double numeric = (up - down) / (2.0 * static_cast<double>(eps));
      const double exact = static_cast<double>(analytic[pi].At(i));
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1.0});
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace lid

#endif  // LID_AUTODIFF_H_

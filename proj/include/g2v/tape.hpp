/*
 * Copyright 2026 The g2v Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef G2V_TAPE_HPP_
#define G2V_TAPE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace g2v {

template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
struct Param {
  Mat<T> value;
  Mat<T> grad;

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

// Reverse-mode tape over vector-valued nodes. Ops record their value
// immediately and a closure that pushes the output gradient into their
// inputs (and into parameter gradients). Build one tape per sample, call
// Backward once.
template <typename T>
class Tape {
 public:
  using Id = int;

  Id Constant(Vec<T> value) { return Push(std::move(value), nullptr); }

  // A column-vector parameter (bias, gate logit) as a node.
  Id Leaf(Param<T>& p) {
    Vec<T> value = Eigen::Map<const Vec<T>>(p.value.data(), p.value.size());
    Param<T>* param = &p;
    const Id out = Next();
    return Push(std::move(value), [this, param, out] {
      Eigen::Map<Vec<T>>(param->grad.data(), param->grad.size()) += grad(out);
    });
  }

  Id MatVec(Param<T>& w, Id x) {
    Param<T>* param = &w;
    const Id out = Next();
    return Push(w.value * value(x), [this, param, x, out] {
      param->grad.noalias() += grad(out) * value(x).transpose();
      mutable_grad(x).noalias() += param->value.transpose() * grad(out);
    });
  }

  Id Affine(Param<T>& w, Id x, Param<T>& b) { return Add(MatVec(w, x), Leaf(b)); }

  Id Add(Id a, Id b) {
    const Id out = Next();
    return Push(value(a) + value(b), [this, a, b, out] {
      mutable_grad(a) += grad(out);
      mutable_grad(b) += grad(out);
    });
  }

  Id Relu(Id x) {
    for (T z : value(x)) Mark(z > T(0));
    const Id out = Next();
    return Push(value(x).cwiseMax(T(0)), [this, x, out] {
      mutable_grad(x) += (value(x).array() > T(0)).select(grad(out), T(0)).matrix();
    });
  }

  Id Sigmoid(Id x) {
    const Id out = Next();
    Vec<T> s = value(x).unaryExpr([](T z) { return T(1) / (T(1) + std::exp(-z)); });
    return Push(std::move(s), [this, x, out] {
      const auto& s = value(out).array();
      mutable_grad(x).array() += grad(out).array() * s * (T(1) - s);
    });
  }

  Id Concat(Id a, Id b) {
    const Eigen::Index na = value(a).size();
    const Eigen::Index nb = value(b).size();
    Vec<T> joined(na + nb);
    joined << value(a), value(b);
    const Id out = Next();
    return Push(std::move(joined), [this, a, b, na, nb, out] {
      mutable_grad(a) += grad(out).head(na);
      mutable_grad(b) += grad(out).tail(nb);
    });
  }

  // out[i * |b| + j] = a[i] * b[j]
  Id Kron(Id a, Id b) {
    const Eigen::Index na = value(a).size();
    const Eigen::Index nb = value(b).size();
    Vec<T> out_value(na * nb);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out_value.data(), na, nb) = value(a) * value(b).transpose();
    const Id out = Next();
    return Push(std::move(out_value), [this, a, b, na, nb, out] {
      const auto g = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic,
                                                    Eigen::RowMajor>>(grad(out).data(), na, nb);
      mutable_grad(a).noalias() += g * value(b);
      mutable_grad(b).noalias() += g.transpose() * value(a);
    });
  }

  // (1 - alpha) h + alpha q with alpha a 1-element node.
  Id Gate(Id h, Id q, Id alpha) {
    const T a = value(alpha)(0);
    const Id out = Next();
    return Push((T(1) - a) * value(h) + a * value(q), [this, h, q, alpha, out] {
      const T a = value(alpha)(0);
      mutable_grad(h) += (T(1) - a) * grad(out);
      mutable_grad(q) += a * grad(out);
      mutable_grad(alpha)(0) += grad(out).dot(value(q) - value(h));
    });
  }

  // Scaled dot-product attention of one query over `keys`/`values`, split
  // into `heads` equal feature slices; returns the concatenated head
  // outputs (before any output projection).
  Id MultiHeadAttend(Id q, std::span<const Id> keys, std::span<const Id> values,
                     int heads) {
    const Eigen::Index d = value(q).size();
    const Eigen::Index dh = d / heads;
    const auto n = static_cast<Eigen::Index>(keys.size());
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    Mat<T> weights(heads, n);
    Vec<T> result = Vec<T>::Zero(d);
    for (int h = 0; h < heads; ++h) {
      Vec<T> scores(n);
      for (Eigen::Index l = 0; l < n; ++l) {
        scores(l) = value(q).segment(h * dh, dh).dot(value(keys[l]).segment(h * dh, dh)) * scale;
      }
      const T max_score = scores.maxCoeff();
      Vec<T> e = (scores.array() - max_score).exp().matrix();
      e /= e.sum();
      weights.row(h) = e.transpose();
      for (Eigen::Index l = 0; l < n; ++l) {
        result.segment(h * dh, dh) += e(l) * value(values[l]).segment(h * dh, dh);
      }
    }
    std::vector<Id> k(keys.begin(), keys.end());
    std::vector<Id> v(values.begin(), values.end());
    const Id out = Next();
    return Push(std::move(result), [this, q, k, v, weights, heads, dh, scale, out] {
      const auto n = static_cast<Eigen::Index>(k.size());
      for (int h = 0; h < heads; ++h) {
        const auto g = grad(out).segment(h * dh, dh);
        Vec<T> dweight(n);
        for (Eigen::Index l = 0; l < n; ++l) {
          mutable_grad(v[l]).segment(h * dh, dh) += weights(h, l) * g;
          dweight(l) = g.dot(value(v[l]).segment(h * dh, dh));
        }
        const T mean = weights.row(h).dot(dweight.transpose());
        for (Eigen::Index l = 0; l < n; ++l) {
          const T dscore = weights(h, l) * (dweight(l) - mean) * scale;
          mutable_grad(q).segment(h * dh, dh) += dscore * value(k[l]).segment(h * dh, dh);
          mutable_grad(k[l]).segment(h * dh, dh) += dscore * value(q).segment(h * dh, dh);
        }
      }
    });
  }

  // Elementwise clamp; gradient passes only strictly inside (lo, hi).
  Id Clamp(Id x, T lo, T hi) {
    for (T z : value(x)) Mark(z > lo && z < hi);
    const Id out = Next();
    return Push(value(x).cwiseMax(lo).cwiseMin(hi), [this, x, lo, hi, out] {
      const auto& in = value(x).array();
      mutable_grad(x).array() += ((in > lo) && (in < hi)).select(grad(out).array(), T(0));
    });
  }

  // Binary cross-entropy of a 1-element probability node against a 0/1
  // label.
  Id Bce(Id p, T label) {
    const T prob = value(p)(0);
    Vec<T> loss(1);
    loss(0) = -(label * std::log(prob) + (T(1) - label) * std::log(T(1) - prob));
    const Id out = Next();
    return Push(std::move(loss), [this, p, label, out] {
      const T prob = value(p)(0);
      mutable_grad(p)(0) += grad(out)(0) * (-label / prob + (T(1) - label) / (T(1) - prob));
    });
  }

  const Vec<T>& value(Id id) const { return nodes_[id].value; }
  const Vec<T>& grad(Id id) const { return nodes_[id].grad; }

  void Backward(Id out, T seed = T(1)) {
    for (Node& node : nodes_) node.grad.setZero(node.value.size());
    nodes_[out].grad.setConstant(seed);
    for (Id i = out; i >= 0; --i) {
      if (nodes_[i].backward) nodes_[i].backward();
    }
  }

  size_t size() const { return nodes_.size(); }
  // Hash of every piecewise branch taken (ReLU sign, clamp range) so far.
  uint64_t branch_signature() const { return signature_; }

 private:
  struct Node {
    Vec<T> value;
    Vec<T> grad;
    std::function<void()> backward;
  };

  Id Next() const { return static_cast<Id>(nodes_.size()); }

  Id Push(Vec<T> value, std::function<void()> backward) {
    nodes_.push_back({std::move(value), Vec<T>(), std::move(backward)});
    return Next() - 1;
  }

  Vec<T>& mutable_grad(Id id) { return nodes_[id].grad; }

  void Mark(bool taken) { signature_ = (signature_ ^ (taken ? 0x9dU : 0x3bU)) * 0x100000001b3ULL; }

  std::vector<Node> nodes_;
  uint64_t signature_ = 0xcbf29ce484222325ULL;
};

}  // namespace g2v

#endif  // G2V_TAPE_HPP_

// Copyright 2026 Voxpatch Authors.
//
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

#ifndef VOXPATCH_MODEL_LAYERS_HPP_
#define VOXPATCH_MODEL_LAYERS_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "voxpatch/errors.hpp"
#include "voxpatch/rng.hpp"
#include "voxpatch/tensor/ops.hpp"
#include "voxpatch/tensor/tensor.hpp"

// Parameterized building blocks. Every block registers its tensors with a
// ParamRegistry under a dotted name so checkpoints and the optimizer see
// one flat, deterministically ordered list.

namespace voxpatch::model {

template <typename Real>
class ParamRegistry {
 public:
  Tensor<Real> add(std::string name, Tensor<Real> t) {
    for (const auto& [existing, unused] : items_) {
      if (existing == name) {
        throw ContractError("duplicate parameter name " + name);
      }
    }
    t.set_requires_grad(true);
    items_.emplace_back(std::move(name), t);
    return t;
  }

  const std::vector<std::pair<std::string, Tensor<Real>>>& items() const {
    return items_;
  }

  std::vector<Tensor<Real>> tensors() const {
    std::vector<Tensor<Real>> out;
    out.reserve(items_.size());
    for (const auto& [name, t] : items_) out.push_back(t);
    return out;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
  }

 private:
  std::vector<std::pair<std::string, Tensor<Real>>> items_;
};

namespace init {

// Linear and conv weights: uniform within +/- sqrt(1/fan_in).
template <typename Real>
Tensor<Real> uniform_fan_in(Rng& rng, const std::vector<std::size_t>& shape,
                            std::size_t fan_in) {
  auto t = Tensor<Real>::zeros(shape);
  const double s = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (auto& v : t.mutable_value()) {
    v = static_cast<Real>(rng.uniform(-s, s));
  }
  return t;
}

template <typename Real>
Tensor<Real> normal(Rng& rng, const std::vector<std::size_t>& shape) {
  auto t = Tensor<Real>::zeros(shape);
  for (auto& v : t.mutable_value()) v = static_cast<Real>(rng.normal());
  return t;
}

}  // namespace init

template <typename Real>
struct Linear {
  Tensor<Real> w;  // [in x out]
  Tensor<Real> b;  // [out]

  Linear() = default;
  Linear(ParamRegistry<Real>& reg, const std::string& name, int in, int out,
         Rng& rng) {
    w = reg.add(name + ".w",
                init::uniform_fan_in<Real>(rng,
                                           {static_cast<std::size_t>(in),
                                            static_cast<std::size_t>(out)},
                                           static_cast<std::size_t>(in)));
    b = reg.add(name + ".b",
                Tensor<Real>::zeros({static_cast<std::size_t>(out)}));
  }

  Tensor<Real> operator()(const Tensor<Real>& x) const {
    return add(matmul(x, w), b);
  }
};

template <typename Real>
struct LayerNorm {
  Tensor<Real> gamma;
  Tensor<Real> beta;

  LayerNorm() = default;
  LayerNorm(ParamRegistry<Real>& reg, const std::string& name, int dim) {
    gamma = reg.add(name + ".gamma",
                    Tensor<Real>::full({static_cast<std::size_t>(dim)},
                                       Real(1)));
    beta = reg.add(name + ".beta",
                   Tensor<Real>::zeros({static_cast<std::size_t>(dim)}));
  }

  Tensor<Real> operator()(const Tensor<Real>& x) const {
    return layer_norm(x, gamma, beta);
  }
};

// conv1d (same padding) -> per-sequence channel norm -> ReLU -> dropout.
// The channel norm is batch norm run in instance mode: desk-scale training
// feeds one sequence at a time, so statistics come from the time axis.
template <typename Real>
struct ConvBlock {
  Tensor<Real> w;  // [k x Cin x Cout]
  Tensor<Real> b;
  Tensor<Real> gamma;
  Tensor<Real> beta;
  double drop = 0.0;

  ConvBlock() = default;
  ConvBlock(ParamRegistry<Real>& reg, const std::string& name, int k, int cin,
            int cout, double dropout_p, Rng& rng)
      : drop(dropout_p) {
    w = reg.add(name + ".w",
                init::uniform_fan_in<Real>(
                    rng,
                    {static_cast<std::size_t>(k), static_cast<std::size_t>(cin),
                     static_cast<std::size_t>(cout)},
                    static_cast<std::size_t>(k) *
                        static_cast<std::size_t>(cin)));
    b = reg.add(name + ".b",
                Tensor<Real>::zeros({static_cast<std::size_t>(cout)}));
    gamma = reg.add(name + ".gamma",
                    Tensor<Real>::full({static_cast<std::size_t>(cout)},
                                       Real(1)));
    beta = reg.add(name + ".beta",
                   Tensor<Real>::zeros({static_cast<std::size_t>(cout)}));
  }

  Tensor<Real> operator()(const Tensor<Real>& x, bool train,
                          Rng& dropout_rng) const {
    auto h = relu(time_norm(conv1d_same(x, w, b), gamma, beta));
    return dropout(h, drop, train, dropout_rng);
  }
};

// Sinusoidal position table, rows are positions. Row 0 is [0, 1, 0, 1, ...].
template <typename Real>
Tensor<Real> sinusoidal_positions(std::size_t length, std::size_t dim) {
  auto pe = Tensor<Real>::zeros({length, dim});
  auto& v = pe.mutable_value();
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i + 1 < dim; i += 2) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, static_cast<double>(i) / static_cast<double>(dim));
      v[pos * dim + i] = static_cast<Real>(std::sin(angle));
      v[pos * dim + i + 1] = static_cast<Real>(std::cos(angle));
    }
  }
  return pe;
}

// h + alpha * PE with a per-stream trainable alpha, initialized to 1.
template <typename Real>
struct ScaledPositionalEncoding {
  Tensor<Real> alpha;

  ScaledPositionalEncoding() = default;
  ScaledPositionalEncoding(ParamRegistry<Real>& reg, const std::string& name) {
    alpha = reg.add(name + ".alpha", Tensor<Real>::full({1}, Real(1)));
  }

  Tensor<Real> operator()(const Tensor<Real>& h) const {
    auto pe = sinusoidal_positions<Real>(h.dim(0), h.dim(1));
    return add(h, mul(pe, alpha));
  }
};

// One post-norm transformer encoder layer: MHSA + residual + layer norm,
// then a position-wise FFN + residual + layer norm. Heads are separate
// projection triples; concatenated they equal the usual packed layout.
template <typename Real>
struct EncoderLayer {
  std::vector<Linear<Real>> q, k, v;
  Linear<Real> out;
  LayerNorm<Real> ln_attn;
  Linear<Real> ffn1, ffn2;
  LayerNorm<Real> ln_ffn;
  int head_dim = 0;

  EncoderLayer() = default;
  EncoderLayer(ParamRegistry<Real>& reg, const std::string& name, int hidden,
               int heads, int ffn_inner, Rng& rng)
      : head_dim(hidden / heads) {
    for (int h = 0; h < heads; ++h) {
      const std::string hn = name + ".attn.h" + std::to_string(h);
      q.emplace_back(reg, hn + ".q", hidden, head_dim, rng);
      k.emplace_back(reg, hn + ".k", hidden, head_dim, rng);
      v.emplace_back(reg, hn + ".v", hidden, head_dim, rng);
    }
    out = Linear<Real>(reg, name + ".attn.out", hidden, hidden, rng);
    ln_attn = LayerNorm<Real>(reg, name + ".attn.ln", hidden);
    ffn1 = Linear<Real>(reg, name + ".ffn.fc1", hidden, ffn_inner, rng);
    ffn2 = Linear<Real>(reg, name + ".ffn.fc2", ffn_inner, hidden, rng);
    ln_ffn = LayerNorm<Real>(reg, name + ".ffn.ln", hidden);
  }

  // attn_probs, when given, collects each head's [T x T] softmax weights.
  Tensor<Real> operator()(const Tensor<Real>& x,
                          std::vector<Tensor<Real>>* attn_probs =
                              nullptr) const {
    const auto scale = Tensor<Real>::scalar(
        static_cast<Real>(1.0 / std::sqrt(static_cast<double>(head_dim))));
    std::vector<Tensor<Real>> heads;
    heads.reserve(q.size());
    for (std::size_t h = 0; h < q.size(); ++h) {
      auto qh = q[h](x);
      auto kh = k[h](x);
      auto vh = v[h](x);
      auto probs = softmax(mul(matmul_nt(qh, kh), scale));
      if (attn_probs) attn_probs->push_back(probs);
      heads.push_back(matmul(probs, vh));
    }
    auto attended = out(concat_cols(heads));
    auto x1 = ln_attn(add(x, attended));
    auto f = ffn2(relu(ffn1(x1)));
    return ln_ffn(add(x1, f));
  }
};

template <typename Real>
struct EncoderStack {
  std::vector<EncoderLayer<Real>> layers;

  EncoderStack() = default;
  EncoderStack(ParamRegistry<Real>& reg, const std::string& name, int n_layers,
               int hidden, int heads, int ffn_inner, Rng& rng) {
    for (int i = 0; i < n_layers; ++i) {
      layers.emplace_back(reg, name + "." + std::to_string(i), hidden, heads,
                          ffn_inner, rng);
    }
  }

  Tensor<Real> operator()(Tensor<Real> x) const {
    for (const auto& layer : layers) x = layer(x);
    return x;
  }
};

}  // namespace voxpatch::model

#endif  // VOXPATCH_MODEL_LAYERS_HPP_

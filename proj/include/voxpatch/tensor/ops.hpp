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

#ifndef VOXPATCH_TENSOR_OPS_HPP_
#define VOXPATCH_TENSOR_OPS_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "voxpatch/rng.hpp"
#include "voxpatch/tensor/dispatch.hpp"
#include "voxpatch/tensor/tensor.hpp"

// Differentiable operations. Forward values are computed eagerly; when grad
// mode is on and an input participates, a backward closure is recorded on
// the output node. Closures accumulate (never overwrite) into input grads.
//
// Broadcasting is limited to what the model needs: same shape, a row
// vector over the rows of a matrix, and a scalar over anything.

namespace voxpatch {

namespace detail {

template <typename Real, typename Fn>
void record_vec(Tensor<Real>& out, const std::vector<Tensor<Real>>& inputs,
                Fn&& backward_fn) {
  if (!grad_enabled()) return;
  bool any = false;
  for (const auto& t : inputs) {
    if (t.defined() && t.requires_grad()) any = true;
  }
  if (!any) return;
  auto node = out.node();
  node->requires_grad = true;
  for (const auto& t : inputs) {
    if (t.defined()) node->parents.push_back(t.node());
  }
  node->backward_fn = std::forward<Fn>(backward_fn);
}

enum class Broadcast { kSame, kRow, kScalar };

// Classifies how `small` broadcasts over `big`; throws if incompatible.
template <typename Real>
Broadcast classify_broadcast(const Tensor<Real>& big,
                             const Tensor<Real>& small, const char* op) {
  if (big.shape() == small.shape()) return Broadcast::kSame;
  if (small.numel() == 1) return Broadcast::kScalar;
  if (big.ndim() == 2 && small.numel() == big.dim(1) &&
      (small.ndim() == 1 ||
       (small.ndim() == 2 && small.dim(0) == 1))) {
    return Broadcast::kRow;
  }
  throw ShapeError(std::string(op) + ": cannot broadcast " +
                   shape_str(small.shape()) + " over " +
                   shape_str(big.shape()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// matmul

template <typename Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  auto out = Tensor<Real>::zeros({m, n});
  Blas<Real>::matmul_nn(a.value().data(), k, b.value().data(), n,
                        out.mutable_value().data(), n, m, k, n);
  auto an = a.node();
  auto bn = b.node();
  detail::record(out, {a, b}, [an, bn, m, k, n](TensorNode<Real>& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      // dA += dC * B^T
      Blas<Real>::matmul_nt(o.grad.data(), n, bn->value.data(), n,
                            an->grad.data(), k, m, n, k);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      // dB += A^T * dC
      Blas<Real>::matmul_tn(an->value.data(), k, o.grad.data(), n,
                            bn->grad.data(), n, k, m, n);
    }
  });
  return out;
}

// C = A * B^T, for attention scores without materializing a transpose.
template <typename Real>
Tensor<Real> matmul_nt(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(1)) {
    throw ShapeError("matmul_nt: " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()) + "^T");
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  auto out = Tensor<Real>::zeros({m, n});
  Blas<Real>::matmul_nt(a.value().data(), k, b.value().data(), k,
                        out.mutable_value().data(), n, m, k, n);
  auto an = a.node();
  auto bn = b.node();
  detail::record(out, {a, b}, [an, bn, m, k, n](TensorNode<Real>& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      // dA += dC * B
      Blas<Real>::matmul_nn(o.grad.data(), n, bn->value.data(), k,
                            an->grad.data(), k, m, n, k);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      // dB += dC^T * A
      Blas<Real>::matmul_tn(o.grad.data(), n, an->value.data(), k,
                            bn->grad.data(), k, n, m, k);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// add / sub / mul

template <typename Real>
Tensor<Real> add(const Tensor<Real>& x, const Tensor<Real>& y) {
  // Commutative: put the broadcast side second.
  const bool swap = x.numel() < y.numel();
  const Tensor<Real>& a = swap ? y : x;
  const Tensor<Real>& b = swap ? x : y;
  auto kind = detail::classify_broadcast(a, b, "add");

  auto out = Tensor<Real>::zeros(a.shape());
  const std::size_t n = a.numel();
  const auto* av = a.value().data();
  const auto* bv = b.value().data();
  auto* ov = out.mutable_value().data();
  switch (kind) {
    case detail::Broadcast::kSame:
      Blas<Real>::add(av, bv, ov, n);
      break;
    case detail::Broadcast::kRow: {
      const std::size_t cols = a.dim(1);
      for (std::size_t r = 0; r < a.dim(0); ++r) {
        Blas<Real>::add(av + r * cols, bv, ov + r * cols, cols);
      }
      break;
    }
    case detail::Broadcast::kScalar: {
      const Real s = bv[0];
      for (std::size_t i = 0; i < n; ++i) ov[i] = av[i] + s;
      break;
    }
  }

  auto an = a.node();
  auto bn = b.node();
  detail::record(out, {a, b}, [an, bn, kind](TensorNode<Real>& o) {
    const std::size_t n = o.numel();
    if (an->requires_grad) {
      an->ensure_grad();
      Blas<Real>::axpy(Real(1), o.grad.data(), an->grad.data(), n);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      switch (kind) {
        case detail::Broadcast::kSame:
          Blas<Real>::axpy(Real(1), o.grad.data(), bn->grad.data(), n);
          break;
        case detail::Broadcast::kRow: {
          const std::size_t cols = bn->numel();
          for (std::size_t r = 0; r < n / cols; ++r) {
            Blas<Real>::axpy(Real(1), o.grad.data() + r * cols,
                             bn->grad.data(), cols);
          }
          break;
        }
        case detail::Broadcast::kScalar: {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) acc += o.grad[i];
          bn->grad[0] += static_cast<Real>(acc);
          break;
        }
      }
    }
  });
  return out;
}

template <typename Real>
Tensor<Real> sub(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("sub: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  auto out = Tensor<Real>::zeros(a.shape());
  Blas<Real>::sub(a.value().data(), b.value().data(),
                  out.mutable_value().data(), a.numel());
  auto an = a.node();
  auto bn = b.node();
  detail::record(out, {a, b}, [an, bn](TensorNode<Real>& o) {
    const std::size_t n = o.numel();
    if (an->requires_grad) {
      an->ensure_grad();
      Blas<Real>::axpy(Real(1), o.grad.data(), an->grad.data(), n);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      Blas<Real>::axpy(Real(-1), o.grad.data(), bn->grad.data(), n);
    }
  });
  return out;
}

template <typename Real>
Tensor<Real> mul(const Tensor<Real>& x, const Tensor<Real>& y) {
  const bool swap = x.numel() < y.numel();
  const Tensor<Real>& a = swap ? y : x;
  const Tensor<Real>& b = swap ? x : y;
  auto kind = detail::classify_broadcast(a, b, "mul");

  auto out = Tensor<Real>::zeros(a.shape());
  const std::size_t n = a.numel();
  const auto* av = a.value().data();
  const auto* bv = b.value().data();
  auto* ov = out.mutable_value().data();
  switch (kind) {
    case detail::Broadcast::kSame:
      Blas<Real>::mul(av, bv, ov, n);
      break;
    case detail::Broadcast::kRow: {
      const std::size_t cols = a.dim(1);
      for (std::size_t r = 0; r < a.dim(0); ++r) {
        Blas<Real>::mul(av + r * cols, bv, ov + r * cols, cols);
      }
      break;
    }
    case detail::Broadcast::kScalar:
      Blas<Real>::scale(bv[0], av, ov, n);
      break;
  }

  auto an = a.node();
  auto bn = b.node();
  detail::record(out, {a, b}, [an, bn, kind](TensorNode<Real>& o) {
    const std::size_t n = o.numel();
    const auto* g = o.grad.data();
    const auto* av = an->value.data();
    const auto* bv = bn->value.data();
    if (an->requires_grad) {
      an->ensure_grad();
      auto* da = an->grad.data();
      switch (kind) {
        case detail::Broadcast::kSame:
          for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * bv[i];
          break;
        case detail::Broadcast::kRow: {
          const std::size_t cols = bn->numel();
          for (std::size_t r = 0; r < n / cols; ++r) {
            for (std::size_t j = 0; j < cols; ++j) {
              da[r * cols + j] += g[r * cols + j] * bv[j];
            }
          }
          break;
        }
        case detail::Broadcast::kScalar:
          Blas<Real>::axpy(bv[0], g, da, n);
          break;
      }
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      auto* db = bn->grad.data();
      switch (kind) {
        case detail::Broadcast::kSame:
          for (std::size_t i = 0; i < n; ++i) db[i] += g[i] * av[i];
          break;
        case detail::Broadcast::kRow: {
          const std::size_t cols = bn->numel();
          for (std::size_t r = 0; r < n / cols; ++r) {
            for (std::size_t j = 0; j < cols; ++j) {
              db[j] += g[r * cols + j] * av[r * cols + j];
            }
          }
          break;
        }
        case detail::Broadcast::kScalar: {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) acc += double(g[i]) * av[i];
          db[0] += static_cast<Real>(acc);
          break;
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// relu / abs

template <typename Real>
Tensor<Real> relu(const Tensor<Real>& x) {
  auto out = Tensor<Real>::zeros(x.shape());
  Blas<Real>::relu(x.value().data(), out.mutable_value().data(), x.numel());
  auto xn = x.node();
  detail::record(out, {x}, [xn](TensorNode<Real>& o) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    Blas<Real>::relu_backward(xn->value.data(), o.grad.data(),
                              xn->grad.data(), o.numel());
  });
  return out;
}

template <typename Real>
Tensor<Real> abs(const Tensor<Real>& x) {
  auto out = Tensor<Real>::zeros(x.shape());
  const auto* xv = x.value().data();
  auto* ov = out.mutable_value().data();
  for (std::size_t i = 0; i < x.numel(); ++i) ov[i] = std::fabs(xv[i]);
  auto xn = x.node();
  detail::record(out, {x}, [xn](TensorNode<Real>& o) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const auto* xv = xn->value.data();
    auto* dx = xn->grad.data();
    for (std::size_t i = 0; i < o.numel(); ++i) {
      if (xv[i] > Real(0)) {
        dx[i] += o.grad[i];
      } else if (xv[i] < Real(0)) {
        dx[i] -= o.grad[i];
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// softmax over the last dimension

template <typename Real>
Tensor<Real> softmax(const Tensor<Real>& x) {
  if (x.ndim() == 0 || x.numel() == 0) {
    throw ShapeError("softmax: empty tensor");
  }
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.numel() / cols;
  auto out = Tensor<Real>::zeros(x.shape());
  const auto* xv = x.value().data();
  auto* ov = out.mutable_value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto* xr = xv + r * cols;
    auto* orow = ov + r * cols;
    const Real mx = Blas<Real>::max(xr, cols);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = std::exp(static_cast<double>(xr[j] - mx));
      orow[j] = static_cast<Real>(e);
      denom += e;
    }
    const Real inv = static_cast<Real>(1.0 / denom);
    Blas<Real>::scale(inv, orow, orow, cols);
  }
  auto xn = x.node();
  detail::record(out, {x}, [xn, rows, cols](TensorNode<Real>& o) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const auto* s = o.value.data() + r * cols;
      const auto* g = o.grad.data() + r * cols;
      auto* dx = xn->grad.data() + r * cols;
      double inner = 0.0;
      for (std::size_t j = 0; j < cols; ++j) inner += double(g[j]) * s[j];
      for (std::size_t j = 0; j < cols; ++j) {
        dx[j] += s[j] * (g[j] - static_cast<Real>(inner));
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// layer_norm over the last dimension, affine transform included

template <typename Real>
Tensor<Real> layer_norm(const Tensor<Real>& x, const Tensor<Real>& gamma,
                        const Tensor<Real>& beta, Real eps = Real(1e-5)) {
  if (x.ndim() != 2) throw ShapeError("layer_norm: expected 2-D input");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (gamma.numel() != cols || beta.numel() != cols) {
    throw ShapeError("layer_norm: affine params do not match " +
                     std::to_string(cols) + " columns");
  }
  auto out = Tensor<Real>::zeros(x.shape());
  auto xhat = std::make_shared<std::vector<Real>>(rows * cols);
  auto inv_std = std::make_shared<std::vector<Real>>(rows);
  const auto* xv = x.value().data();
  const auto* gv = gamma.value().data();
  const auto* bv = beta.value().data();
  auto* ov = out.mutable_value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto* xr = xv + r * cols;
    double mean = 0.0;
    for (std::size_t j = 0; j < cols; ++j) mean += xr[j];
    mean /= cols;
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double d = xr[j] - mean;
      var += d * d;
    }
    var /= cols;
    const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
    (*inv_std)[r] = static_cast<Real>(inv);
    for (std::size_t j = 0; j < cols; ++j) {
      const Real xh = static_cast<Real>((xr[j] - mean) * inv);
      (*xhat)[r * cols + j] = xh;
      ov[r * cols + j] = gv[j] * xh + bv[j];
    }
  }
  auto xn = x.node();
  auto gn = gamma.node();
  auto bn = beta.node();
  detail::record(out, {x, gamma, beta},
                 [xn, gn, bn, xhat, inv_std, rows, cols](TensorNode<Real>& o) {
    const auto* g = o.grad.data();
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        Blas<Real>::axpy(Real(1), g + r * cols, bn->grad.data(), cols);
      }
    }
    if (gn->requires_grad) {
      gn->ensure_grad();
      auto* dg = gn->grad.data();
      for (std::size_t r = 0; r < rows; ++r) {
        const auto* xh = xhat->data() + r * cols;
        const auto* gr = g + r * cols;
        for (std::size_t j = 0; j < cols; ++j) dg[j] += gr[j] * xh[j];
      }
    }
    if (xn->requires_grad) {
      xn->ensure_grad();
      const auto* gv = gn->value.data();
      for (std::size_t r = 0; r < rows; ++r) {
        const auto* xh = xhat->data() + r * cols;
        const auto* gr = g + r * cols;
        auto* dx = xn->grad.data() + r * cols;
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          const double dxh = double(gr[j]) * gv[j];
          m1 += dxh;
          m2 += dxh * xh[j];
        }
        m1 /= cols;
        m2 /= cols;
        const double inv = (*inv_std)[r];
        for (std::size_t j = 0; j < cols; ++j) {
          const double dxh = double(gr[j]) * gv[j];
          dx[j] += static_cast<Real>(inv * (dxh - m1 - xh[j] * m2));
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// time_norm: per-channel normalization over the time axis of a [T x C]
// sequence. This is how the text CNN's batch normalization behaves at
// batch size 1 (instance mode).

template <typename Real>
Tensor<Real> time_norm(const Tensor<Real>& x, const Tensor<Real>& gamma,
                       const Tensor<Real>& beta, Real eps = Real(1e-5)) {
  if (x.ndim() != 2) throw ShapeError("time_norm: expected 2-D input");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (gamma.numel() != cols || beta.numel() != cols) {
    throw ShapeError("time_norm: affine params do not match channels");
  }
  auto out = Tensor<Real>::zeros(x.shape());
  auto xhat = std::make_shared<std::vector<Real>>(rows * cols);
  auto inv_std = std::make_shared<std::vector<Real>>(cols);
  const auto* xv = x.value().data();
  const auto* gv = gamma.value().data();
  const auto* bv = beta.value().data();
  auto* ov = out.mutable_value().data();
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < rows; ++t) mean += xv[t * cols + c];
    mean /= rows;
    double var = 0.0;
    for (std::size_t t = 0; t < rows; ++t) {
      const double d = xv[t * cols + c] - mean;
      var += d * d;
    }
    var /= rows;
    const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
    (*inv_std)[c] = static_cast<Real>(inv);
    for (std::size_t t = 0; t < rows; ++t) {
      const Real xh = static_cast<Real>((xv[t * cols + c] - mean) * inv);
      (*xhat)[t * cols + c] = xh;
      ov[t * cols + c] = gv[c] * xh + bv[c];
    }
  }
  auto xn = x.node();
  auto gn = gamma.node();
  auto bn = beta.node();
  detail::record(out, {x, gamma, beta},
                 [xn, gn, bn, xhat, inv_std, rows, cols](TensorNode<Real>& o) {
    const auto* g = o.grad.data();
    if (bn->requires_grad) {
      bn->ensure_grad();
      auto* db = bn->grad.data();
      for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t c = 0; c < cols; ++c) db[c] += g[t * cols + c];
      }
    }
    if (gn->requires_grad) {
      gn->ensure_grad();
      auto* dg = gn->grad.data();
      for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t c = 0; c < cols; ++c) {
          dg[c] += g[t * cols + c] * (*xhat)[t * cols + c];
        }
      }
    }
    if (xn->requires_grad) {
      xn->ensure_grad();
      const auto* gv = gn->value.data();
      auto* dx = xn->grad.data();
      for (std::size_t c = 0; c < cols; ++c) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t t = 0; t < rows; ++t) {
          const double dxh = double(g[t * cols + c]) * gv[c];
          m1 += dxh;
          m2 += dxh * (*xhat)[t * cols + c];
        }
        m1 /= rows;
        m2 /= rows;
        const double inv = (*inv_std)[c];
        for (std::size_t t = 0; t < rows; ++t) {
          const double dxh = double(g[t * cols + c]) * gv[c];
          dx[t * cols + c] += static_cast<Real>(
              inv * (dxh - m1 - (*xhat)[t * cols + c] * m2));
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// dropout with inverted scaling; exact identity when off

template <typename Real>
Tensor<Real> dropout(const Tensor<Real>& x, double p, bool train, Rng& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw ValueError("dropout: p must be in [0, 1), got " + std::to_string(p));
  }
  if (!train || p == 0.0) return x;
  const Real keep_scale = static_cast<Real>(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<Real>>(x.numel());
  for (auto& m : *mask) m = rng.bernoulli(p) ? Real(0) : keep_scale;
  auto out = Tensor<Real>::zeros(x.shape());
  Blas<Real>::mul(x.value().data(), mask->data(), out.mutable_value().data(),
                  x.numel());
  auto xn = x.node();
  detail::record(out, {x}, [xn, mask](TensorNode<Real>& o) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const auto* g = o.grad.data();
    auto* dx = xn->grad.data();
    for (std::size_t i = 0; i < o.numel(); ++i) dx[i] += g[i] * (*mask)[i];
  });
  return out;
}

// ---------------------------------------------------------------------------
// conv1d with same padding: x [T x Cin], w [k x Cin x Cout], b [Cout]

template <typename Real>
Tensor<Real> conv1d_same(const Tensor<Real>& x, const Tensor<Real>& w,
                         const Tensor<Real>& b) {
  if (x.ndim() != 2 || w.ndim() != 3) {
    throw ShapeError("conv1d: x must be [T x Cin], w [k x Cin x Cout]");
  }
  const std::size_t T = x.dim(0), cin = x.dim(1);
  const std::size_t k = w.dim(0), cout = w.dim(2);
  if (w.dim(1) != cin) {
    throw ShapeError("conv1d: kernel expects " + std::to_string(w.dim(1)) +
                     " input channels, got " + std::to_string(cin));
  }
  if (k % 2 == 0) {
    throw ValueError("conv1d: kernel width must be odd for same padding");
  }
  if (b.numel() != cout) throw ShapeError("conv1d: bias/channel mismatch");
  const std::size_t pad = k / 2;
  const std::size_t kc = k * cin;

  // im2col with zero padding outside [0, T)
  auto cols = std::make_shared<std::vector<Real>>(T * kc, Real(0));
  const auto* xv = x.value().data();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t dk = 0; dk < k; ++dk) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + dk) -
                                 static_cast<std::ptrdiff_t>(pad);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
      std::copy_n(xv + src * cin, cin, cols->data() + t * kc + dk * cin);
    }
  }

  auto out = Tensor<Real>::zeros({T, cout});
  auto* ov = out.mutable_value().data();
  Blas<Real>::matmul_nn(cols->data(), kc, w.value().data(), cout, ov, cout, T,
                        kc, cout);
  const auto* bv = b.value().data();
  for (std::size_t t = 0; t < T; ++t) {
    Blas<Real>::add(ov + t * cout, bv, ov + t * cout, cout);
  }

  auto xn = x.node();
  auto wn = w.node();
  auto bn = b.node();
  detail::record(out, {x, w, b},
                 [xn, wn, bn, cols, T, cin, k, cout, pad,
                  kc](TensorNode<Real>& o) {
    const auto* g = o.grad.data();
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t t = 0; t < T; ++t) {
        Blas<Real>::axpy(Real(1), g + t * cout, bn->grad.data(), cout);
      }
    }
    if (wn->requires_grad) {
      wn->ensure_grad();
      // dW += cols^T * dY
      Blas<Real>::matmul_tn(cols->data(), kc, g, cout, wn->grad.data(), cout,
                            kc, T, cout);
    }
    if (xn->requires_grad) {
      xn->ensure_grad();
      // dcols = dY * W^T, then scatter back over the padded taps
      std::vector<Real> dcols(T * kc, Real(0));
      Blas<Real>::matmul_nt(g, cout, wn->value.data(), cout, dcols.data(), kc,
                            T, cout, kc);
      auto* dx = xn->grad.data();
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t dk = 0; dk < k; ++dk) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + dk) -
                                     static_cast<std::ptrdiff_t>(pad);
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
          Blas<Real>::axpy(Real(1), dcols.data() + t * kc + dk * cin,
                           dx + src * cin, cin);
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// embedding lookup: ids index rows of table [V x E]

template <typename Real>
Tensor<Real> embedding(const std::vector<int>& ids, const Tensor<Real>& table) {
  if (table.ndim() != 2) throw ShapeError("embedding: table must be 2-D");
  const std::size_t V = table.dim(0), E = table.dim(1);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= V) {
      throw ValueError("embedding: id " + std::to_string(id) +
                       " outside inventory of " + std::to_string(V));
    }
  }
  auto out = Tensor<Real>::zeros({ids.size(), E});
  auto* ov = out.mutable_value().data();
  const auto* tv = table.value().data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(tv + static_cast<std::size_t>(ids[i]) * E, E, ov + i * E);
  }
  auto tn = table.node();
  auto ids_copy = std::make_shared<std::vector<int>>(ids);
  detail::record(out, {table}, [tn, ids_copy, E](TensorNode<Real>& o) {
    if (!tn->requires_grad) return;
    tn->ensure_grad();
    for (std::size_t i = 0; i < ids_copy->size(); ++i) {
      Blas<Real>::axpy(Real(1), o.grad.data() + i * E,
                       tn->grad.data() +
                           static_cast<std::size_t>((*ids_copy)[i]) * E,
                       E);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// concat along columns

template <typename Real>
Tensor<Real> concat_cols(const std::vector<Tensor<Real>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].dim(0);
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.ndim() != 2 || p.dim(0) != rows) {
      throw ShapeError("concat_cols: row mismatch");
    }
    total += p.dim(1);
  }
  auto out = Tensor<Real>::zeros({rows, total});
  auto* ov = out.mutable_value().data();
  std::size_t col0 = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.dim(1);
    const auto* pv = p.value().data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv + r * c, c, ov + r * total + col0);
    }
    col0 += c;
  }
  std::vector<std::shared_ptr<TensorNode<Real>>> nodes;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    nodes.push_back(p.node());
    widths.push_back(p.dim(1));
  }
  detail::record_vec(out, parts,
                     [nodes, widths, rows, total](TensorNode<Real>& o) {
    std::size_t col0 = 0;
    for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
      const std::size_t c = widths[pi];
      if (nodes[pi]->requires_grad) {
        nodes[pi]->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) {
          Blas<Real>::axpy(Real(1), o.grad.data() + r * total + col0,
                           nodes[pi]->grad.data() + r * c, c);
        }
      }
      col0 += c;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// repeat_rows: the length regulator's core. Row i of x appears counts[i]
// times, order preserved.

template <typename Real>
Tensor<Real> repeat_rows(const Tensor<Real>& x, const std::vector<int>& counts) {
  if (x.ndim() != 2) throw ShapeError("repeat_rows: expected 2-D input");
  if (counts.size() != x.dim(0)) {
    throw ContractError("repeat_rows: " + std::to_string(counts.size()) +
                        " counts for " + std::to_string(x.dim(0)) + " rows");
  }
  std::size_t total = 0;
  for (int c : counts) {
    if (c < 0) throw ContractError("repeat_rows: negative count");
    total += static_cast<std::size_t>(c);
  }
  const std::size_t cols = x.dim(1);
  auto out = Tensor<Real>::zeros({total, cols});
  auto* ov = out.mutable_value().data();
  const auto* xv = x.value().data();
  std::size_t r = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (int rep = 0; rep < counts[i]; ++rep) {
      std::copy_n(xv + i * cols, cols, ov + r * cols);
      ++r;
    }
  }
  auto xn = x.node();
  auto counts_copy = std::make_shared<std::vector<int>>(counts);
  detail::record(out, {x}, [xn, counts_copy, cols](TensorNode<Real>& o) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    std::size_t r = 0;
    for (std::size_t i = 0; i < counts_copy->size(); ++i) {
      for (int rep = 0; rep < (*counts_copy)[i]; ++rep) {
        Blas<Real>::axpy(Real(1), o.grad.data() + r * cols,
                         xn->grad.data() + i * cols, cols);
        ++r;
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// full reductions

template <typename Real>
Tensor<Real> sum_all(const Tensor<Real>& x) {
  double acc = 0.0;
  for (Real v : x.value()) acc += v;
  auto out = Tensor<Real>::scalar(static_cast<Real>(acc));
  auto xn = x.node();
  detail::record(out, {x}, [xn](TensorNode<Real>& o) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const Real g = o.grad[0];
    auto* dx = xn->grad.data();
    for (std::size_t i = 0; i < xn->numel(); ++i) dx[i] += g;
  });
  return out;
}

template <typename Real>
Tensor<Real> mean_all(const Tensor<Real>& x) {
  if (x.numel() == 0) throw ShapeError("mean_all: empty tensor");
  double acc = 0.0;
  for (Real v : x.value()) acc += v;
  const std::size_t n = x.numel();
  auto out = Tensor<Real>::scalar(static_cast<Real>(acc / n));
  auto xn = x.node();
  detail::record(out, {x}, [xn, n](TensorNode<Real>& o) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const Real g = o.grad[0] / static_cast<Real>(n);
    auto* dx = xn->grad.data();
    for (std::size_t i = 0; i < n; ++i) dx[i] += g;
  });
  return out;
}

}  // namespace voxpatch

#endif  // VOXPATCH_TENSOR_OPS_HPP_

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

#ifndef VOXPATCH_TENSOR_ADAM_HPP_
#define VOXPATCH_TENSOR_ADAM_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "voxpatch/tensor/tensor.hpp"

namespace voxpatch {

// Adam with bias correction. step() consumes the gradients currently on the
// registered tensors and zeroes them afterwards, so callers can accumulate
// several examples' backward passes into one update.
template <typename Real>
class Adam {
 public:
  explicit Adam(std::vector<Tensor<Real>> params, double lr = 1e-3,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)),
        lr_(lr),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i].numel(), 0.0);
      v_[i].assign(params_[i].numel(), 0.0);
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  std::size_t step_count() const { return t_; }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      if (!p.has_grad()) {
        throw ContractError("adam step " + std::to_string(t_) +
                            ": parameter " + std::to_string(i) +
                            " has no gradient");
      }
      auto& w = p.mutable_value();
      auto& g = p.mutable_grad();
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double gj = g[j];
        m[j] = beta1_ * m[j] + (1.0 - beta1_) * gj;
        v[j] = beta2_ * v[j] + (1.0 - beta2_) * gj * gj;
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        w[j] -= static_cast<Real>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
      p.zero_grad();
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

 private:
  std::vector<Tensor<Real>> params_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  // Moments kept in double so long runs do not drift in f32.
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace voxpatch

#endif  // VOXPATCH_TENSOR_ADAM_HPP_

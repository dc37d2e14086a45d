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

#ifndef VOXPATCH_TRAIN_LOSS_HPP_
#define VOXPATCH_TRAIN_LOSS_HPP_

#include <cmath>

#include "voxpatch/corpus/framing.hpp"
#include "voxpatch/errors.hpp"
#include "voxpatch/tensor/ops.hpp"
#include "voxpatch/tensor/tensor.hpp"

namespace voxpatch::train {

// Relative weight of the duration term in the combined objective.
inline constexpr double kDurationLossWeight = 0.01;

struct LossReport {
  double l2_mel = 0.0;
  double l1_duration = 0.0;
  double total = 0.0;
  int step = 0;
};

template <typename Real>
struct LossTerms {
  Tensor<Real> l2_mel;
  Tensor<Real> l1_duration;
  Tensor<Real> total;
};

// L2 over every mel entry of the whole sentence (the model is graded on
// the full output, not just the edited region) plus L1 over every
// phoneme's log(1+d) duration, weighted 1 : 0.01.
template <typename Real>
LossTerms<Real> mel_duration_loss(const Tensor<Real>& pred_mel,
                                  const Tensor<Real>& target_mel,
                                  const Tensor<Real>& pred_logdur,
                                  const Tensor<Real>& target_logdur) {
  if (pred_mel.shape() != target_mel.shape()) {
    throw ContractError("mel_duration_loss: mel shapes " +
                        shape_str(pred_mel.shape()) + " vs " +
                        shape_str(target_mel.shape()));
  }
  if (pred_logdur.shape() != target_logdur.shape()) {
    throw ContractError("mel_duration_loss: duration shapes " +
                        shape_str(pred_logdur.shape()) + " vs " +
                        shape_str(target_logdur.shape()));
  }
  auto dm = sub(pred_mel, target_mel);
  auto l2 = mean_all(mul(dm, dm));
  auto l1 = mean_all(abs(sub(pred_logdur, target_logdur)));
  auto total = add(
      l2, mul(Tensor<Real>::scalar(static_cast<Real>(kDurationLossWeight)),
              l1));
  return {l2, l1, total};
}

template <typename Real>
LossReport compute_loss(const Tensor<Real>& pred_mel,
                        const Tensor<Real>& target_mel,
                        const Tensor<Real>& pred_logdur,
                        const Tensor<Real>& target_logdur, int step = 0) {
  NoGradGuard ng;
  auto terms = mel_duration_loss(pred_mel, target_mel, pred_logdur,
                                 target_logdur);
  LossReport rep;
  rep.l2_mel = static_cast<double>(terms.l2_mel.value()[0]);
  rep.l1_duration = static_cast<double>(terms.l1_duration.value()[0]);
  rep.total = static_cast<double>(terms.total.value()[0]);
  rep.step = step;
  return rep;
}

// Targets for the duration head: log(1+d) per position, column vector.
template <typename Real>
Tensor<Real> log_duration_targets(const corpus::DurationTrack& d) {
  std::vector<Real> v;
  v.reserve(d.frames.size());
  for (int f : d.frames) {
    if (f < 0) {
      throw ContractError("log_duration_targets: negative duration");
    }
    v.push_back(static_cast<Real>(std::log1p(static_cast<double>(f))));
  }
  return Tensor<Real>::from_data({d.frames.size(), 1}, std::move(v));
}

}  // namespace voxpatch::train

#endif  // VOXPATCH_TRAIN_LOSS_HPP_

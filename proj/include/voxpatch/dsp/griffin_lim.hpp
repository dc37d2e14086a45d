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

#ifndef VOXPATCH_DSP_GRIFFIN_LIM_HPP_
#define VOXPATCH_DSP_GRIFFIN_LIM_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "voxpatch/dsp/stft.hpp"

namespace voxpatch::dsp {

// Phase reconstruction by alternating projections (plain updates, no
// momentum): start from seeded random phase, then repeat
// istft -> stft -> keep phase, restore target magnitude.
//
// mag is row-major [frames x bins], elementwise >= 0 (negative entries are
// an input error). Output length is (frames-1)*hop. If convergence_out is
// given it receives the per-iteration spectral-convergence error
// frob(|STFT(x_i)| - mag) / frob(mag), which is non-increasing.
std::vector<float> griffin_lim(const std::vector<double>& mag,
                               std::size_t frames, const StftConfig& cfg,
                               int iterations = 60, std::uint64_t seed = 0,
                               std::vector<double>* convergence_out = nullptr);

}  // namespace voxpatch::dsp

#endif  // VOXPATCH_DSP_GRIFFIN_LIM_HPP_

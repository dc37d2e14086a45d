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

#ifndef VOXPATCH_DSP_FFT_HPP_
#define VOXPATCH_DSP_FFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

namespace voxpatch::dsp {

using cplx = std::complex<double>;

// In-place iterative radix-2 FFT. Size must be a power of two.
// inverse=true applies the conjugate transform including the 1/N scale.
void fft_inplace(std::vector<cplx>& a, bool inverse);

// Real-input FFT: returns the n/2+1 nonnegative-frequency bins.
std::vector<cplx> rfft(const std::vector<double>& x);

// Inverse of rfft: reconstructs the length-n real signal from n/2+1 bins.
std::vector<double> irfft(const std::vector<cplx>& spectrum, std::size_t n);

}  // namespace voxpatch::dsp

#endif  // VOXPATCH_DSP_FFT_HPP_

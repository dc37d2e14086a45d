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

#ifndef VOXPATCH_DSP_STFT_HPP_
#define VOXPATCH_DSP_STFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

#include "voxpatch/dsp/fft.hpp"

namespace voxpatch::dsp {

// Analysis geometry: 50 ms periodic Hann window, 12.5 ms hop at 24 kHz,
// window zero-padded into a 2048-point FFT. Frames are centered, so the
// signal is reflect-padded by n_fft/2 on both sides and the frame count
// is floor(len/hop) + 1.
struct StftConfig {
  int sample_rate = 24000;
  int win_length = 1200;
  int hop = 300;
  int n_fft = 2048;

  std::size_t bins() const { return static_cast<std::size_t>(n_fft) / 2 + 1; }
};

std::size_t stft_frames(std::size_t n_samples, const StftConfig& cfg);

// Row-major [T x bins] complex spectrogram. Throws ValueError on an empty
// signal.
std::vector<cplx> stft(const std::vector<float>& x, const StftConfig& cfg);

std::vector<double> stft_magnitude(const std::vector<float>& x,
                                   const StftConfig& cfg);

// Weighted overlap-add inverse with window-squared normalization.
// spec is row-major [frames x bins]; output has (frames-1)*hop samples.
std::vector<float> istft(const std::vector<cplx>& spec, std::size_t frames,
                         const StftConfig& cfg);

// Periodic Hann of cfg.win_length taps, zero-padded symmetrically to
// cfg.n_fft. Exposed for tests.
std::vector<double> padded_window(const StftConfig& cfg);

}  // namespace voxpatch::dsp

#endif  // VOXPATCH_DSP_STFT_HPP_

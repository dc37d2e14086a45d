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

#ifndef VOXPATCH_DSP_MEL_HPP_
#define VOXPATCH_DSP_MEL_HPP_

#include <cstddef>
#include <vector>

#include "voxpatch/dsp/stft.hpp"

namespace voxpatch::dsp {

inline constexpr std::size_t kMelBins = 80;
inline constexpr double kLogFloor = 1e-5;

// Log-mel features, row-major [frames x bins], natural log with a 1e-5
// floor before the log.
struct Mel {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> data;

  float at(std::size_t t, std::size_t b) const { return data[t * bins + b]; }
  float& at(std::size_t t, std::size_t b) { return data[t * bins + b]; }
};

// Slaney-style triangular filterbank: linear spacing below 1 kHz, log
// above, each filter scaled by 2/(f_hi - f_lo). Rows are mel bands,
// columns FFT bins.
struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  double fmin = 0.0;
  double fmax = 0.0;
  std::vector<double> weights;  // row-major [n_mels x n_bins]
  std::vector<double> centers_hz;

  double at(std::size_t m, std::size_t k) const {
    return weights[m * n_bins + k];
  }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Throws ValueError unless 0 <= fmin < fmax <= sr/2.
MelFilterbank build_mel_filterbank(int n_fft, int sample_rate,
                                   std::size_t n_mels = kMelBins,
                                   double fmin = 0.0, double fmax = -1.0);

// log(max(fb . |STFT|, 1e-5)); frame count obeys the stft law.
Mel wav_to_mel(const std::vector<float>& samples, const MelFilterbank& fb,
               const StftConfig& cfg);

// Least-squares magnitude recovery: max(pinv(fb) . exp(mel), 0).
// Output is row-major [frames x n_bins].
std::vector<double> mel_to_linear(const Mel& mel, const MelFilterbank& fb);

}  // namespace voxpatch::dsp

#endif  // VOXPATCH_DSP_MEL_HPP_

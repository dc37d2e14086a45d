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

#include "voxpatch/dsp/mel.hpp"

#include <algorithm>
#include <cmath>

#include "voxpatch/errors.hpp"

namespace voxpatch::dsp {

namespace {

// Slaney scale constants: linear below 1 kHz, logarithmic above.
constexpr double kFsp = 200.0 / 3.0;
constexpr double kMinLogHz = 1000.0;
constexpr double kMinLogMel = kMinLogHz / kFsp;
const double kLogStep = std::log(6.4) / 27.0;

// Solves A x = b in place for symmetric positive definite A via Cholesky.
// A is n x n row-major and is overwritten by its factor on first use.
class CholeskySolver {
 public:
  CholeskySolver(std::vector<double> a, std::size_t n)
      : l_(std::move(a)), n_(n) {
    for (std::size_t j = 0; j < n_; ++j) {
      double d = l_[j * n_ + j];
      for (std::size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
      if (d <= 0.0) {
        throw ContractError("filterbank Gram matrix is not positive definite");
      }
      l_[j * n_ + j] = std::sqrt(d);
      for (std::size_t i = j + 1; i < n_; ++i) {
        double s = l_[i * n_ + j];
        for (std::size_t k = 0; k < j; ++k) {
          s -= l_[i * n_ + k] * l_[j * n_ + k];
        }
        l_[i * n_ + j] = s / l_[j * n_ + j];
      }
    }
  }

  void solve(std::vector<double>& b) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * b[k];
      b[i] = s / l_[i * n_ + i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = b[ii];
      for (std::size_t k = ii + 1; k < n_; ++k) s -= l_[k * n_ + ii] * b[k];
      b[ii] = s / l_[ii * n_ + ii];
    }
  }

 private:
  std::vector<double> l_;
  std::size_t n_;
};

}  // namespace

double hz_to_mel(double hz) {
  if (hz < kMinLogHz) return hz / kFsp;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kMinLogMel) return mel * kFsp;
  return kMinLogHz * std::exp(kLogStep * (mel - kMinLogMel));
}

MelFilterbank build_mel_filterbank(int n_fft, int sample_rate,
                                   std::size_t n_mels, double fmin,
                                   double fmax) {
  if (fmax < 0.0) fmax = sample_rate / 2.0;
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw ValueError("mel filterbank: need 0 <= fmin < fmax <= sr/2, got [" +
                     std::to_string(fmin) + ", " + std::to_string(fmax) + "]");
  }
  if (n_mels == 0) throw ValueError("mel filterbank: n_mels must be positive");

  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.n_bins = static_cast<std::size_t>(n_fft) / 2 + 1;
  fb.fmin = fmin;
  fb.fmax = fmax;
  fb.weights.assign(fb.n_mels * fb.n_bins, 0.0);

  // n_mels + 2 edge frequencies equally spaced on the mel scale.
  std::vector<double> edges(n_mels + 2);
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_mels + 1));
  }
  fb.centers_hz.assign(edges.begin() + 1, edges.end() - 1);

  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    const double enorm = 2.0 / (hi - lo);  // Slaney area normalization
    for (std::size_t k = 0; k < fb.n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      const double w = std::max(0.0, std::min(up, down));
      fb.weights[m * fb.n_bins + k] = w * enorm;
    }
  }
  return fb;
}

Mel wav_to_mel(const std::vector<float>& samples, const MelFilterbank& fb,
               const StftConfig& cfg) {
  if (fb.n_bins != cfg.bins()) {
    throw ShapeError("wav_to_mel: filterbank built for a different n_fft");
  }
  const auto mag = stft_magnitude(samples, cfg);
  const std::size_t frames = stft_frames(samples.size(), cfg);
  Mel mel;
  mel.frames = frames;
  mel.bins = fb.n_mels;
  mel.data.resize(frames * fb.n_mels);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* mrow = mag.data() + t * fb.n_bins;
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      double acc = 0.0;
      const double* w = fb.weights.data() + m * fb.n_bins;
      for (std::size_t k = 0; k < fb.n_bins; ++k) acc += w[k] * mrow[k];
      mel.data[t * fb.n_mels + m] =
          static_cast<float>(std::log(std::max(acc, kLogFloor)));
    }
  }
  return mel;
}

std::vector<double> mel_to_linear(const Mel& mel, const MelFilterbank& fb) {
  if (mel.bins != fb.n_mels) {
    throw ShapeError("mel_to_linear: " + std::to_string(mel.bins) +
                     " mel bins vs filterbank " + std::to_string(fb.n_mels));
  }
  const std::size_t M = fb.n_mels, K = fb.n_bins, T = mel.frames;

  // Gram matrix fb . fb^T; the filterbank has full row rank, so the
  // pseudo-inverse is fb^T . gram^-1.
  std::vector<double> gram(M * M, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = i; j < M; ++j) {
      double s = 0.0;
      const double* wi = fb.weights.data() + i * K;
      const double* wj = fb.weights.data() + j * K;
      for (std::size_t k = 0; k < K; ++k) s += wi[k] * wj[k];
      gram[i * M + j] = s;
      gram[j * M + i] = s;
    }
  }
  CholeskySolver chol(std::move(gram), M);

  std::vector<double> out(T * K, 0.0);
  std::vector<double> z(M);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t m = 0; m < M; ++m) {
      z[m] = std::exp(static_cast<double>(mel.at(t, m)));
    }
    chol.solve(z);
    double* orow = out.data() + t * K;
    for (std::size_t m = 0; m < M; ++m) {
      const double* w = fb.weights.data() + m * K;
      const double zm = z[m];
      for (std::size_t k = 0; k < K; ++k) orow[k] += w[k] * zm;
    }
    for (std::size_t k = 0; k < K; ++k) orow[k] = std::max(orow[k], 0.0);
  }
  return out;
}

}  // namespace voxpatch::dsp

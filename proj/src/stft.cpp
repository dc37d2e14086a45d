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

#include "voxpatch/dsp/stft.hpp"

#include <cmath>
#include <numbers>

#include "voxpatch/errors.hpp"

namespace voxpatch::dsp {

namespace {

// Reflection without edge repetition, bouncing for any overshoot.
std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

std::vector<double> padded_window(const StftConfig& cfg) {
  std::vector<double> w(static_cast<std::size_t>(cfg.n_fft), 0.0);
  const std::size_t wl = static_cast<std::size_t>(cfg.win_length);
  const std::size_t off = (static_cast<std::size_t>(cfg.n_fft) - wl) / 2;
  for (std::size_t i = 0; i < wl; ++i) {
    w[off + i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                      static_cast<double>(i) /
                                      static_cast<double>(wl));
  }
  return w;
}

std::size_t stft_frames(std::size_t n_samples, const StftConfig& cfg) {
  return n_samples / static_cast<std::size_t>(cfg.hop) + 1;
}

std::vector<cplx> stft(const std::vector<float>& x, const StftConfig& cfg) {
  if (x.empty()) throw ValueError("stft: empty signal");
  const std::size_t n = x.size();
  const std::size_t n_fft = static_cast<std::size_t>(cfg.n_fft);
  const std::size_t pad = n_fft / 2;
  const std::size_t frames = stft_frames(n, cfg);
  const std::size_t bins = cfg.bins();
  const auto window = padded_window(cfg);

  std::vector<cplx> out(frames * bins);
  std::vector<double> frame(n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::ptrdiff_t start =
        static_cast<std::ptrdiff_t>(t) * cfg.hop - static_cast<std::ptrdiff_t>(pad);
    for (std::size_t i = 0; i < n_fft; ++i) {
      const auto src = reflect_index(start + static_cast<std::ptrdiff_t>(i),
                                     static_cast<std::ptrdiff_t>(n));
      frame[i] = static_cast<double>(x[src]) * window[i];
    }
    auto spec = rfft(frame);
    std::copy(spec.begin(), spec.end(), out.begin() + t * bins);
  }
  return out;
}

std::vector<double> stft_magnitude(const std::vector<float>& x,
                                   const StftConfig& cfg) {
  auto spec = stft(x, cfg);
  std::vector<double> mag(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) mag[i] = std::abs(spec[i]);
  return mag;
}

std::vector<float> istft(const std::vector<cplx>& spec, std::size_t frames,
                         const StftConfig& cfg) {
  const std::size_t bins = cfg.bins();
  if (frames == 0 || spec.size() != frames * bins) {
    throw ValueError("istft: spectrogram size does not match frame count");
  }
  const std::size_t n_fft = static_cast<std::size_t>(cfg.n_fft);
  const std::size_t pad = n_fft / 2;
  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  const auto window = padded_window(cfg);

  const std::size_t padded_len = (frames - 1) * hop + n_fft;
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> wsum(padded_len, 0.0);
  std::vector<cplx> row(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    std::copy(spec.begin() + t * bins, spec.begin() + (t + 1) * bins,
              row.begin());
    auto frame = irfft(row, n_fft);
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      acc[start + i] += frame[i] * window[i];
      wsum[start + i] += window[i] * window[i];
    }
  }
  // Drop the centering pad; remaining length is (frames-1)*hop.
  const std::size_t out_len = (frames - 1) * hop;
  std::vector<float> out(out_len, 0.0f);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double denom = wsum[pad + i];
    out[i] = denom > 1e-9 ? static_cast<float>(acc[pad + i] / denom) : 0.0f;
  }
  return out;
}

}  // namespace voxpatch::dsp

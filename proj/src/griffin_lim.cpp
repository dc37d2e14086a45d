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

#include "voxpatch/dsp/griffin_lim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "voxpatch/errors.hpp"
#include "voxpatch/rng.hpp"

namespace voxpatch::dsp {

std::vector<float> griffin_lim(const std::vector<double>& mag,
                               std::size_t frames, const StftConfig& cfg,
                               int iterations, std::uint64_t seed,
                               std::vector<double>* convergence_out) {
  const std::size_t bins = cfg.bins();
  if (frames == 0 || mag.size() != frames * bins) {
    throw ShapeError("griffin_lim: magnitude size does not match frames");
  }
  double mag_norm_sq = 0.0;
  for (double v : mag) {
    if (v < 0.0) throw ValueError("griffin_lim: negative magnitude");
    mag_norm_sq += v * v;
  }
  if (iterations < 1) throw ValueError("griffin_lim: iterations must be >= 1");
  if (convergence_out) convergence_out->clear();

  // Zero magnitude has only the zero waveform as a consistent solution.
  if (mag_norm_sq == 0.0) {
    if (convergence_out) convergence_out->assign(iterations, 0.0);
    return std::vector<float>((frames - 1) * cfg.hop, 0.0f);
  }

  Rng rng(seed);
  std::vector<cplx> spec(frames * bins);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    spec[i] = std::polar(mag[i], phi);
  }

  // The alternation runs on the padded overlap-add domain: frame t lives at
  // offset t*hop of a (frames-1)*hop + n_fft sample buffer. Re-deriving the
  // boundary reflection every pass would perturb the edge frames and stall
  // spectral convergence near 0.1; on the padded domain both steps are exact
  // least-squares projections and the error decreases monotonically.
  const auto window = padded_window(cfg);
  const std::size_t n_fft = static_cast<std::size_t>(cfg.n_fft);
  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  const std::size_t pad = n_fft / 2;
  const std::size_t padded_len = (frames - 1) * hop + n_fft;

  std::vector<double> wsum(padded_len, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < n_fft; ++i) {
      wsum[t * hop + i] += window[i] * window[i];
    }
  }

  std::vector<double> y(padded_len);
  std::vector<cplx> row(bins);
  std::vector<double> frame(n_fft);
  const auto overlap_add = [&] {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      std::copy(spec.begin() + t * bins, spec.begin() + (t + 1) * bins,
                row.begin());
      const auto fr = irfft(row, n_fft);
      for (std::size_t i = 0; i < n_fft; ++i) {
        y[t * hop + i] += fr[i] * window[i];
      }
    }
    for (std::size_t i = 0; i < padded_len; ++i) {
      y[i] = wsum[i] > 1e-9 ? y[i] / wsum[i] : 0.0;
    }
  };

  for (int it = 0; it < iterations; ++it) {
    overlap_add();
    double err_sq = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t i = 0; i < n_fft; ++i) {
        frame[i] = y[t * hop + i] * window[i];
      }
      const auto rebuilt = rfft(frame);
      for (std::size_t k = 0; k < bins; ++k) {
        const std::size_t idx = t * bins + k;
        const double m = std::abs(rebuilt[k]);
        const double d = m - mag[idx];
        err_sq += d * d;
        spec[idx] =
            m > 0.0 ? rebuilt[k] * (mag[idx] / m) : cplx(mag[idx], 0.0);
      }
    }
    if (convergence_out) {
      convergence_out->push_back(std::sqrt(err_sq / mag_norm_sq));
    }
  }

  overlap_add();
  std::vector<float> out((frames - 1) * hop);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(y[pad + i]);
  }
  return out;
}

}  // namespace voxpatch::dsp

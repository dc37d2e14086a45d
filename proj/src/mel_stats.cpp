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

#include "voxpatch/train/mel_stats.hpp"

#include <cmath>

#include "voxpatch/errors.hpp"

namespace voxpatch::train {

nlohmann::json MelStats::to_json() const {
  return nlohmann::json{{"mean", mean}, {"stdev", stdev}};
}

MelStats MelStats::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("mean") || !j.contains("stdev") ||
      !j["mean"].is_array() || !j["stdev"].is_array()) {
    throw ParseError("mel stats: expected {mean: [...], stdev: [...]}");
  }
  MelStats s;
  s.mean = j["mean"].get<std::vector<double>>();
  s.stdev = j["stdev"].get<std::vector<double>>();
  if (s.mean.size() != s.stdev.size()) {
    throw ParseError("mel stats: mean and stdev lengths differ");
  }
  for (double d : s.stdev) {
    if (!(d > 0.0)) throw ParseError("mel stats: stdev must be positive");
  }
  return s;
}

MelStats compute_mel_stats(const std::vector<const dsp::Mel*>& mels) {
  if (mels.empty()) throw ValueError("mel stats: no input mels");
  const std::size_t bins = mels.front()->bins;
  std::vector<double> sum(bins, 0.0), sumsq(bins, 0.0);
  std::size_t n = 0;
  for (const auto* m : mels) {
    if (m->bins != bins) throw ValueError("mel stats: bin count mismatch");
    for (std::size_t t = 0; t < m->frames; ++t) {
      for (std::size_t b = 0; b < bins; ++b) {
        const double v = m->at(t, b);
        sum[b] += v;
        sumsq[b] += v * v;
      }
    }
    n += m->frames;
  }
  if (n == 0) throw ValueError("mel stats: no frames");
  MelStats s;
  s.mean.resize(bins);
  s.stdev.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    s.mean[b] = sum[b] / static_cast<double>(n);
    const double var = sumsq[b] / static_cast<double>(n) -
                       s.mean[b] * s.mean[b];
    s.stdev[b] = var > 1e-8 ? std::sqrt(var) : 1.0;
  }
  return s;
}

namespace {

dsp::Mel affine_mel(const dsp::Mel& mel, const MelStats& stats,
                    bool forward) {
  if (mel.bins != stats.mean.size()) {
    throw ValueError("mel stats: stats cover " +
                     std::to_string(stats.mean.size()) + " bins, mel has " +
                     std::to_string(mel.bins));
  }
  dsp::Mel out = mel;
  for (std::size_t t = 0; t < mel.frames; ++t) {
    for (std::size_t b = 0; b < mel.bins; ++b) {
      const double v = mel.at(t, b);
      out.at(t, b) = static_cast<float>(
          forward ? (v - stats.mean[b]) / stats.stdev[b]
                  : v * stats.stdev[b] + stats.mean[b]);
    }
  }
  return out;
}

}  // namespace

dsp::Mel normalize_mel(const dsp::Mel& mel, const MelStats& stats) {
  return affine_mel(mel, stats, true);
}

dsp::Mel denormalize_mel(const dsp::Mel& mel, const MelStats& stats) {
  return affine_mel(mel, stats, false);
}

}  // namespace voxpatch::train

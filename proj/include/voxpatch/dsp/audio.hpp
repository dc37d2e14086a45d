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

#ifndef VOXPATCH_DSP_AUDIO_HPP_
#define VOXPATCH_DSP_AUDIO_HPP_

#include <filesystem>
#include <vector>

namespace voxpatch::dsp {

inline constexpr int kPipelineSampleRate = 24000;

struct AudioClip {
  std::vector<float> samples;  // mono, nominally in [-1, 1]
  int sample_rate = kPipelineSampleRate;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// PCM 16-bit mono WAV only. IoError if unreadable, ParseError for any
// other format (including multi-channel).
AudioClip load_wav(const std::filesystem::path& path);

// PCM 16-bit mono; samples are clamped to [-1, 1]. Written atomically.
void save_wav(const std::filesystem::path& path, const AudioClip& clip);

// Linear-interpolation resampler. Callers are expected to warn when the
// pipeline has to resample; this function itself is silent and pure.
AudioClip resample_linear(const AudioClip& clip, int target_rate);

}  // namespace voxpatch::dsp

#endif  // VOXPATCH_DSP_AUDIO_HPP_

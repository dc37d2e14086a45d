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

#include "voxpatch/corpus/splice.hpp"

#include <algorithm>
#include <cmath>

#include "voxpatch/errors.hpp"

namespace voxpatch::corpus {

dsp::AudioClip splice_output(const dsp::AudioClip& original,
                             const dsp::AudioClip& patched,
                             const EditScript& script, int hop_samples) {
  if (original.sample_rate != patched.sample_rate) {
    throw ValueError("splice_output: sample rates differ");
  }
  // No samples change, so no crossfade: the caller gets its input back
  // bit-for-bit.
  if (script.original_frames == 0 && script.new_frames == 0) {
    return original;
  }

  const std::size_t hop = static_cast<std::size_t>(hop_samples);
  const std::size_t region_start = script.frame_offset * hop;
  const std::size_t replaced = script.original_frames * hop;
  const std::size_t inserted = script.new_frames * hop;
  if (region_start + replaced > original.samples.size()) {
    throw ContractError("splice_output: edited region outside the original");
  }
  if (region_start + inserted > patched.samples.size()) {
    throw ContractError("splice_output: edited region outside the patch");
  }

  const auto fade_len = static_cast<std::size_t>(
      std::llround(kCrossfadeSeconds * original.sample_rate));
  auto blend = [](float a, float b, std::size_t i, std::size_t n) {
    // a linear in [0, 1] across the fade; the degenerate one-sample fade
    // takes the midpoint.
    const float alpha =
        n > 1 ? static_cast<float>(i) / static_cast<float>(n - 1) : 0.5f;
    return (1.0f - alpha) * a + alpha * b;
  };

  dsp::AudioClip out;
  out.sample_rate = original.sample_rate;
  out.samples.reserve(original.samples.size() + inserted - replaced);

  out.samples.insert(out.samples.end(), original.samples.begin(),
                     original.samples.begin() +
                         static_cast<std::ptrdiff_t>(region_start));
  const std::size_t left = std::min(fade_len, region_start);
  for (std::size_t i = 0; i < left; ++i) {
    const std::size_t s = region_start - left + i;
    out.samples[s] = blend(original.samples[s], patched.samples[s], i, left);
  }

  out.samples.insert(
      out.samples.end(),
      patched.samples.begin() + static_cast<std::ptrdiff_t>(region_start),
      patched.samples.begin() +
          static_cast<std::ptrdiff_t>(region_start + inserted));

  const std::size_t right =
      std::min({fade_len, patched.samples.size() - region_start - inserted,
                original.samples.size() - region_start - replaced});
  for (std::size_t i = 0; i < right; ++i) {
    out.samples.push_back(blend(patched.samples[region_start + inserted + i],
                                original.samples[region_start + replaced + i],
                                i, right));
  }
  out.samples.insert(out.samples.end(),
                     original.samples.begin() + static_cast<std::ptrdiff_t>(
                                                    region_start + replaced +
                                                    right),
                     original.samples.end());
  return out;
}

}  // namespace voxpatch::corpus

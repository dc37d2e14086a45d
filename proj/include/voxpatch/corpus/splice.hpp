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

#ifndef VOXPATCH_CORPUS_SPLICE_HPP_
#define VOXPATCH_CORPUS_SPLICE_HPP_

#include "voxpatch/corpus/example.hpp"
#include "voxpatch/dsp/audio.hpp"

namespace voxpatch::corpus {

inline constexpr double kCrossfadeSeconds = 0.005;

// Assembles the edited narration: original audio outside the edited
// region, vocoded audio inside it. `patched` is the vocoded full
// sentence; the region starts at script.frame_offset frames in both
// timelines, replaces script.original_frames frames of the original, and
// contributes script.new_frames frames of patched audio. Both seams get
// a 5 ms linear crossfade (sample = (1-a)*old + a*new, a linear in
// [0, 1]); a seam at the utterance edge is left as a hard cut. An empty
// edit returns the original bit-for-bit. Throws ContractError when either
// region falls outside its clip and ValueError on sample-rate mismatch.
dsp::AudioClip splice_output(const dsp::AudioClip& original,
                             const dsp::AudioClip& patched,
                             const EditScript& script,
                             int hop_samples = 300);

}  // namespace voxpatch::corpus

#endif  // VOXPATCH_CORPUS_SPLICE_HPP_

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

#ifndef VOXPATCH_CORPUS_FRAMING_HPP_
#define VOXPATCH_CORPUS_FRAMING_HPP_

#include <string>
#include <vector>

#include "voxpatch/corpus/alignment.hpp"

namespace voxpatch::corpus {

// One mel frame per hop of 12.5 ms at 24 kHz.
inline constexpr double kHopSeconds = 0.0125;

// Per-phoneme frame counts aligned with a phone list.
struct DurationTrack {
  enum class Kind { kReference, kPredicted };
  std::vector<int> frames;
  Kind kind = Kind::kReference;

  int total() const;
};

// Alignment quantized to the frame grid. `phones` may be shorter than the
// input record: phones that round to zero frames are merged away.
struct FramedPhones {
  std::vector<PhoneInterval> phones;
  DurationTrack durations;
};

// Quantizes phone boundaries to frames: boundary b_i = round(start_i/hop)
// (round half up), final boundary from the last phone's end, duration_i =
// b_{i+1} - b_i. The boundaries telescope, so the durations always sum to
// round(total_seconds/hop) exactly. A phone whose interval rounds to zero
// frames is dropped and noted in `warnings`; its neighbors already own the
// frames. Throws ValueError when every phone rounds to zero.
FramedPhones seconds_to_frames(const AlignmentRecord& rec,
                               double hop_seconds = kHopSeconds,
                               std::vector<std::string>* warnings = nullptr);

}  // namespace voxpatch::corpus

#endif  // VOXPATCH_CORPUS_FRAMING_HPP_

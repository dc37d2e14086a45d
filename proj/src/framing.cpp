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

#include "voxpatch/corpus/framing.hpp"

#include <cmath>
#include <numeric>

#include "voxpatch/errors.hpp"

namespace voxpatch::corpus {

int DurationTrack::total() const {
  return std::accumulate(frames.begin(), frames.end(), 0);
}

FramedPhones seconds_to_frames(const AlignmentRecord& rec, double hop_seconds,
                               std::vector<std::string>* warnings) {
  if (hop_seconds <= 0.0) {
    throw ValueError("seconds_to_frames: hop must be positive");
  }
  if (rec.phones.empty()) {
    throw ValueError("seconds_to_frames: record has no phones");
  }

  // Boundaries come from the starts plus the final end; a shared boundary
  // per junction is what makes the sum telescope.
  const std::size_t n = rec.phones.size();
  std::vector<long long> bounds(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    bounds[i] = std::llround(rec.phones[i].start / hop_seconds);
  }
  bounds[n] = std::llround(rec.phones[n - 1].end / hop_seconds);

  FramedPhones out;
  for (std::size_t i = 0; i < n; ++i) {
    const long long d = bounds[i + 1] - bounds[i];
    if (d < 0) {
      throw ValueError("seconds_to_frames: phones[" + std::to_string(i) +
                       "] has negative frame span");
    }
    if (d == 0) {
      if (warnings) {
        warnings->push_back("phones[" + std::to_string(i) + "] (" +
                            rec.phones[i].phone +
                            ") spans zero frames; merged into its neighbor");
      }
      continue;
    }
    out.phones.push_back(rec.phones[i]);
    out.durations.frames.push_back(static_cast<int>(d));
  }
  if (out.phones.empty()) {
    throw ValueError("seconds_to_frames: utterance shorter than one frame");
  }
  out.durations.kind = DurationTrack::Kind::kReference;
  return out;
}

}  // namespace voxpatch::corpus

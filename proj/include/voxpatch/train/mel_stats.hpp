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

#ifndef VOXPATCH_TRAIN_MEL_STATS_HPP_
#define VOXPATCH_TRAIN_MEL_STATS_HPP_

#include <vector>

#include "json.hpp"
#include "voxpatch/dsp/mel.hpp"

namespace voxpatch::train {

// Per-bin corpus statistics. The model trains on standardized mels; the
// zero rows punched into the edited region then sit at the corpus mean,
// and the stats ride along in the checkpoint so inference can undo them.
struct MelStats {
  std::vector<double> mean;
  std::vector<double> stdev;

  nlohmann::json to_json() const;
  static MelStats from_json(const nlohmann::json& j);
};

// Population statistics over all frames of all given mels. Bins with
// (near) zero variance get a unit floor so standardization stays finite.
MelStats compute_mel_stats(const std::vector<const dsp::Mel*>& mels);

dsp::Mel normalize_mel(const dsp::Mel& mel, const MelStats& stats);
dsp::Mel denormalize_mel(const dsp::Mel& mel, const MelStats& stats);

}  // namespace voxpatch::train

#endif  // VOXPATCH_TRAIN_MEL_STATS_HPP_

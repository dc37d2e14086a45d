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

#ifndef VOXPATCH_CORPUS_DATASET_HPP_
#define VOXPATCH_CORPUS_DATASET_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "voxpatch/corpus/alignment.hpp"
#include "voxpatch/corpus/framing.hpp"
#include "voxpatch/dsp/audio.hpp"
#include "voxpatch/dsp/mel.hpp"
#include "voxpatch/dsp/stft.hpp"

namespace voxpatch::corpus {

// A corpus item ready for training or editing. mel.frames equals the
// duration sum exactly.
struct Utterance {
  std::string id;
  AlignmentRecord rec;
  FramedPhones framed;
  dsp::AudioClip audio;
  dsp::Mel mel;
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path alignment;
};

// Newline-delimited JSON, one {"id": str, "alignment": path} per line;
// relative paths resolve against the manifest's directory. Blank lines
// are skipped. Throws ParseError naming the bad line, IoError when the
// file cannot be read.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& file);

// The stft yields floor(len/hop)+1 frames while telescoped durations sum
// to round(total_seconds/hop); the two can differ by one at the tail.
// Trims the mel, or pads it by repeating the final frame, to exactly
// `target_frames`. A difference of more than one frame means the
// alignment does not cover the audio: ParseError.
void align_mel_to_durations(dsp::Mel& mel, int target_frames,
                            const std::string& source);

// Parses the alignment, loads its audio (resolving a relative path
// against the alignment file's directory, resampling to cfg.sample_rate
// with a warning when the rates differ), frames the durations, and
// computes the trimmed mel. A non-empty `audio_override` replaces the
// audio path named by the alignment.
Utterance load_utterance(const std::filesystem::path& alignment_file,
                         const dsp::MelFilterbank& fb,
                         const dsp::StftConfig& cfg,
                         std::vector<std::string>* warnings = nullptr,
                         const std::filesystem::path& audio_override = {});

std::vector<Utterance> load_dataset(const std::filesystem::path& manifest,
                                    const dsp::MelFilterbank& fb,
                                    const dsp::StftConfig& cfg,
                                    std::vector<std::string>* warnings =
                                        nullptr);

}  // namespace voxpatch::corpus

#endif  // VOXPATCH_CORPUS_DATASET_HPP_

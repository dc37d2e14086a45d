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

#ifndef VOXPATCH_TRAIN_PIPELINE_HPP_
#define VOXPATCH_TRAIN_PIPELINE_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "voxpatch/corpus/dataset.hpp"
#include "voxpatch/corpus/example.hpp"
#include "voxpatch/dsp/audio.hpp"
#include "voxpatch/dsp/mel.hpp"
#include "voxpatch/dsp/stft.hpp"
#include "voxpatch/model/network.hpp"
#include "voxpatch/train/mel_stats.hpp"

// End-to-end passes built on the network: the shared training forward,
// duration evaluation on held-out masked words, single-edit inference to
// audio, and whole-sentence resynthesis.

namespace voxpatch::train {

struct ForwardOutput {
  Tensor<float> pred_mel;
  Tensor<float> dur_logits;
};

// Log-mel to waveform: mel-to-linear magnitude plus Griffin-Lim phase
// reconstruction. The clip covers (frames - 1) * hop samples.
dsp::AudioClip vocode_mel(const dsp::Mel& mel, const dsp::MelFilterbank& fb,
                          const dsp::StftConfig& cfg, int gl_iterations,
                          std::uint64_t seed);

// The training-time forward pass: text is regulated with ground-truth
// durations and the spectrogram stream sees the masked span zeroed, so
// pred_mel lines up frame for frame with norm_mel as the target.
ForwardOutput forward_example(const model::Network<float>& net,
                              const dsp::Mel& norm_mel,
                              const corpus::TrainingExample& ex, bool train,
                              Rng& dropout_rng);

struct DurationErrorReport {
  double phoneme_level_error = 0.0;
  double word_level_error = 0.0;
  int n_words = 0;

  nlohmann::json to_json() const;
};

// One masked word's predictions next to its ground truth, both in frames.
struct MaskedWordDurations {
  std::vector<double> predicted;
  std::vector<int> truth;
};

// Phoneme-level error is the mean |predicted - truth| over every masked
// phoneme; word-level sums each word first. Both are in raw frames.
DurationErrorReport duration_errors(
    const std::vector<MaskedWordDurations>& words);

// Masks one qualifying word per utterance (seeded choice), predicts the
// masked durations, and scores them against the alignment's ground truth.
// Utterances without a qualifying word are skipped.
DurationErrorReport eval_duration(const model::Network<float>& net,
                                  const std::vector<corpus::Utterance>& utts,
                                  std::uint64_t seed);

struct EditResult {
  dsp::AudioClip audio;
  dsp::Mel mel;                      // full predicted sentence, log domain
  corpus::DurationTrack durations;   // per phoneme, predictions filled in
  corpus::EditScript script;
};

// Inserts `phonemes` after word `insert_after_word` (-1 for before the
// first word): predicts their durations, decodes the full sentence mel,
// vocodes it, and splices only the new region into the original audio.
// An empty phoneme list is the identity edit: the original comes back
// untouched. Throws ValueError on a bad insertion point or unknown label.
EditResult infer_edit(const model::Network<float>& net, const MelStats& stats,
                      const corpus::Utterance& utt, int insert_after_word,
                      const std::vector<std::string>& phonemes,
                      const dsp::MelFilterbank& fb, const dsp::StftConfig& cfg,
                      int gl_iterations, std::uint64_t seed);

struct WordProvenance {
  int word = -1;
  std::string text;
  std::size_t start_frame = 0;
  int frames = 0;
};

struct ResynthResult {
  dsp::AudioClip audio;
  dsp::Mel mel;  // concatenated synthesized words, log domain
  std::vector<WordProvenance> words;
};

// Masks each word run in turn, synthesizes it from the rest of the
// sentence, and concatenates the synthesized spans in transcript order.
ResynthResult resynth_all(const model::Network<float>& net,
                          const MelStats& stats, const corpus::Utterance& utt,
                          const dsp::MelFilterbank& fb,
                          const dsp::StftConfig& cfg, int gl_iterations,
                          std::uint64_t seed);

}  // namespace voxpatch::train

#endif  // VOXPATCH_TRAIN_PIPELINE_HPP_

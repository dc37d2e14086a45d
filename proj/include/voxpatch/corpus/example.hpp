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

#ifndef VOXPATCH_CORPUS_EXAMPLE_HPP_
#define VOXPATCH_CORPUS_EXAMPLE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "voxpatch/corpus/framing.hpp"
#include "voxpatch/rng.hpp"

namespace voxpatch::corpus {

// Phoneme-level view of an utterance, possibly with an edit applied.
// word_index is non-decreasing (silence carries the preceding word's
// index); inserted flags form at most one contiguous run.
struct PhonemeSequence {
  std::vector<int> ids;
  std::vector<int> word_index;
  std::vector<std::uint8_t> inserted;

  std::size_t size() const { return ids.size(); }
};

// Where an edit sits, in phoneme indices and frames. original_frames is
// the edited region's length on the source recording's timeline (zero for
// a pure insertion); new_frames its length after duration prediction.
struct EditScript {
  std::size_t span_start = 0;
  std::size_t span_end = 0;
  std::size_t frame_offset = 0;
  std::size_t original_frames = 0;
  std::size_t new_frames = 0;
  std::string word_text;

  bool empty() const { return span_start == span_end; }
};

// One masked-word training case. `masked` equals `reference` outside the
// span and is zero inside it; the target mel is the utterance's own.
struct TrainingExample {
  PhonemeSequence seq;
  DurationTrack reference;
  DurationTrack masked;
  EditScript script;
};

// Maps framed phones to inventory IDs with smoothed word indices. No edit
// is active: all inserted flags are false.
PhonemeSequence build_phoneme_sequence(const FramedPhones& framed);

// Contiguous phone run owned by one word, in phone order. A word split by
// repaired silence yields several runs.
struct WordRun {
  int word = -1;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<WordRun> word_runs(const FramedPhones& framed);

// Masks the phones in [begin, end): flags them inserted and zeroes their
// durations in `masked`, as if the span were new text to synthesize while
// the ground truth stays in `reference`.
TrainingExample mask_word_span(const FramedPhones& framed, std::size_t begin,
                               std::size_t end, std::string word_text);

// Picks one qualifying word (more than one phoneme, contiguous in the
// phone list) uniformly at random, flags its phonemes inserted, and zeroes
// their reference durations. Returns nullopt when no word qualifies.
std::optional<TrainingExample> make_training_example(
    const AlignmentRecord& rec, const FramedPhones& framed, Rng& rng);

// Builds the sequence for inserting new phonemes after word
// `insert_after_word` (-1 inserts before the first word, after any leading
// silence). The inserted span gets zero reference durations and
// original_frames == 0. Throws ValueError on an out-of-range word index,
// an unknown phoneme label, or an empty label list.
TrainingExample build_insertion(const AlignmentRecord& rec,
                                const FramedPhones& framed,
                                int insert_after_word,
                                const std::vector<std::string>& phonemes);

}  // namespace voxpatch::corpus

#endif  // VOXPATCH_CORPUS_EXAMPLE_HPP_

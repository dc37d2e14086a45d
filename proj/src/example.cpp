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

#include "voxpatch/corpus/example.hpp"

#include <numeric>

#include "voxpatch/corpus/inventory.hpp"
#include "voxpatch/errors.hpp"

namespace voxpatch::corpus {

namespace {

std::size_t frames_before(const DurationTrack& durations, std::size_t index) {
  return static_cast<std::size_t>(std::accumulate(
      durations.frames.begin(),
      durations.frames.begin() + static_cast<std::ptrdiff_t>(index), 0));
}

}  // namespace

std::vector<WordRun> word_runs(const FramedPhones& framed) {
  std::vector<WordRun> runs;
  for (std::size_t i = 0; i < framed.phones.size(); ++i) {
    const int w = framed.phones[i].word;
    if (w < 0) continue;
    if (!runs.empty() && runs.back().word == w && runs.back().end == i) {
      runs.back().end = i + 1;
    } else {
      runs.push_back(WordRun{w, i, i + 1});
    }
  }
  return runs;
}

TrainingExample mask_word_span(const FramedPhones& framed, std::size_t begin,
                               std::size_t end, std::string word_text) {
  if (begin >= end || end > framed.phones.size()) {
    throw ContractError("mask_word_span: span [" + std::to_string(begin) +
                        ", " + std::to_string(end) + ") outside " +
                        std::to_string(framed.phones.size()) + " phones");
  }
  TrainingExample ex;
  ex.seq = build_phoneme_sequence(framed);
  ex.reference = framed.durations;
  ex.masked = framed.durations;
  for (std::size_t i = begin; i < end; ++i) {
    ex.seq.inserted[i] = 1;
    ex.masked.frames[i] = 0;
  }
  ex.script.span_start = begin;
  ex.script.span_end = end;
  ex.script.frame_offset = frames_before(framed.durations, begin);
  ex.script.original_frames =
      frames_before(framed.durations, end) - ex.script.frame_offset;
  ex.script.new_frames = ex.script.original_frames;
  ex.script.word_text = std::move(word_text);
  return ex;
}

PhonemeSequence build_phoneme_sequence(const FramedPhones& framed) {
  PhonemeSequence seq;
  seq.ids.reserve(framed.phones.size());
  seq.word_index.reserve(framed.phones.size());
  seq.inserted.assign(framed.phones.size(), 0);
  int current = 0;
  for (const auto& p : framed.phones) {
    const int id = phoneme_to_id(p.phone);
    if (id < 0) {
      throw ContractError("build_phoneme_sequence: unvalidated phone \"" +
                          p.phone + "\"");
    }
    seq.ids.push_back(id);
    if (p.word > current) current = p.word;
    seq.word_index.push_back(current);
  }
  return seq;
}

std::optional<TrainingExample> make_training_example(const AlignmentRecord& rec,
                                                     const FramedPhones& framed,
                                                     Rng& rng) {
  std::vector<WordRun> qualifying;
  {
    std::vector<int> run_count(rec.words.size(), 0);
    auto runs = word_runs(framed);
    for (const auto& s : runs) run_count[static_cast<std::size_t>(s.word)] += 1;
    for (const auto& s : runs) {
      if (s.end - s.begin > 1 &&
          run_count[static_cast<std::size_t>(s.word)] == 1) {
        qualifying.push_back(s);
      }
    }
  }
  if (qualifying.empty()) return std::nullopt;

  const auto& chosen =
      qualifying[static_cast<std::size_t>(rng.below(qualifying.size()))];
  return mask_word_span(framed, chosen.begin, chosen.end,
                        rec.words[static_cast<std::size_t>(chosen.word)].word);
}

TrainingExample build_insertion(const AlignmentRecord& rec,
                                const FramedPhones& framed,
                                int insert_after_word,
                                const std::vector<std::string>& phonemes) {
  if (phonemes.empty()) {
    throw ValueError("build_insertion: no phonemes to insert");
  }
  const int n_words = static_cast<int>(rec.words.size());
  if (n_words == 0) {
    throw ValueError("build_insertion: utterance has no words");
  }
  if (insert_after_word < -1 || insert_after_word >= n_words) {
    throw ValueError("build_insertion: word index " +
                     std::to_string(insert_after_word) + " outside [-1, " +
                     std::to_string(n_words - 1) + "]");
  }
  std::vector<int> new_ids;
  for (const auto& label : phonemes) {
    const int id = phoneme_to_id(label);
    if (id < 0) {
      throw ValueError("build_insertion: unknown phoneme \"" + label + "\"");
    }
    new_ids.push_back(id);
  }

  // -1 inserts before the first word's first phone; otherwise after the
  // chosen word's last phone, ahead of any trailing silence.
  std::size_t at = 0;
  bool found = false;
  if (insert_after_word == -1) {
    for (std::size_t i = 0; i < framed.phones.size(); ++i) {
      if (framed.phones[i].word >= 0) {
        at = i;
        found = true;
        break;
      }
    }
  } else {
    for (std::size_t i = 0; i < framed.phones.size(); ++i) {
      if (framed.phones[i].word == insert_after_word) {
        at = i + 1;
        found = true;
      }
    }
  }
  if (!found) {
    throw ValueError("build_insertion: insertion point has no phones");
  }

  const PhonemeSequence base = build_phoneme_sequence(framed);
  TrainingExample ex;
  const std::size_t n = base.size() + new_ids.size();
  ex.seq.ids.reserve(n);
  ex.seq.word_index.reserve(n);
  ex.seq.inserted.reserve(n);
  ex.reference.frames.reserve(n);
  const int span_word = at == 0 ? 0 : base.word_index[at - 1];
  for (std::size_t i = 0; i < at; ++i) {
    ex.seq.ids.push_back(base.ids[i]);
    ex.seq.word_index.push_back(base.word_index[i]);
    ex.seq.inserted.push_back(0);
    ex.reference.frames.push_back(framed.durations.frames[i]);
  }
  for (int id : new_ids) {
    ex.seq.ids.push_back(id);
    ex.seq.word_index.push_back(span_word);
    ex.seq.inserted.push_back(1);
    ex.reference.frames.push_back(0);
  }
  for (std::size_t i = at; i < base.size(); ++i) {
    ex.seq.ids.push_back(base.ids[i]);
    ex.seq.word_index.push_back(base.word_index[i]);
    ex.seq.inserted.push_back(0);
    ex.reference.frames.push_back(framed.durations.frames[i]);
  }
  ex.masked = ex.reference;

  ex.script.span_start = at;
  ex.script.span_end = at + new_ids.size();
  ex.script.frame_offset = frames_before(framed.durations, at);
  ex.script.original_frames = 0;
  ex.script.new_frames = 0;
  std::string text;
  for (const auto& label : phonemes) {
    if (!text.empty()) text += ' ';
    text += label;
  }
  ex.script.word_text = std::move(text);
  return ex;
}

}  // namespace voxpatch::corpus

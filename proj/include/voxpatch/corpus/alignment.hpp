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

#ifndef VOXPATCH_CORPUS_ALIGNMENT_HPP_
#define VOXPATCH_CORPUS_ALIGNMENT_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace voxpatch::corpus {

// One phone interval of a forced alignment. `word` indexes into
// AlignmentRecord::words; -1 marks silence that belongs to no word.
struct PhoneInterval {
  std::string phone;
  double start = 0.0;
  double end = 0.0;
  int word = -1;
};

struct WordInterval {
  std::string word;
  double start = 0.0;
  double end = 0.0;
};

// Validated alignment: phone intervals are sorted, non-overlapping, and
// contiguous from 0 to the final phone end (parsing repairs gaps with SIL).
struct AlignmentRecord {
  std::string audio;
  int sample_rate = 0;
  std::string transcript;
  std::vector<PhoneInterval> phones;
  std::vector<WordInterval> words;
};

// Parses alignment JSON:
//   {"audio": str, "sample_rate": int, "transcript": str,
//    "phones": [{"phone": str, "start": s, "end": s, "word": int}],
//    "words": [{"word": str, "start": s, "end": s}]}
// Unknown phone labels become UNK, and unlabeled gaps become SIL phones;
// both append a note to `warnings` when given. Throws ParseError on
// malformed JSON, missing fields, unsorted or overlapping intervals, or
// out-of-range word indices, naming the offending entry. Throws IoError
// when the file cannot be read.
AlignmentRecord parse_alignment(const std::filesystem::path& file,
                                std::vector<std::string>* warnings = nullptr);

// Same grammar, for already-loaded text. `source` names the input in
// error messages.
AlignmentRecord parse_alignment_text(const std::string& text,
                                     const std::string& source,
                                     std::vector<std::string>* warnings =
                                         nullptr);

// Inverse of parsing: emits the schema above. parse(serialize(rec)) == rec
// for any record that came out of parse_alignment.
std::string serialize_alignment(const AlignmentRecord& rec);

bool operator==(const PhoneInterval& a, const PhoneInterval& b);
bool operator==(const WordInterval& a, const WordInterval& b);
bool operator==(const AlignmentRecord& a, const AlignmentRecord& b);

}  // namespace voxpatch::corpus

#endif  // VOXPATCH_CORPUS_ALIGNMENT_HPP_

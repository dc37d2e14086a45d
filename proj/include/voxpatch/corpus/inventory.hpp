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

#ifndef VOXPATCH_CORPUS_INVENTORY_HPP_
#define VOXPATCH_CORPUS_INVENTORY_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace voxpatch::corpus {

// Fixed phoneme inventory: four specials, then ARPAbet consonants and
// stress-marked vowels in lexicographic order. IDs are stable across runs;
// checkpoints depend on them.
inline constexpr int kPadId = 0;
inline constexpr int kSilId = 1;
inline constexpr int kSpId = 2;
inline constexpr int kUnkId = 3;

const std::vector<std::string>& phoneme_inventory();

std::size_t inventory_size();

// -1 when the label is not in the inventory.
int phoneme_to_id(std::string_view label);

// Throws ValueError when id is out of range.
const std::string& id_to_phoneme(int id);

// SIL and SP carry no lexical content.
bool is_silence_id(int id);

}  // namespace voxpatch::corpus

#endif  // VOXPATCH_CORPUS_INVENTORY_HPP_

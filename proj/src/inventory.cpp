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

#include "voxpatch/corpus/inventory.hpp"

#include <algorithm>
#include <unordered_map>

#include "voxpatch/errors.hpp"

namespace voxpatch::corpus {

namespace {

std::vector<std::string> build_inventory() {
  std::vector<std::string> inv = {"PAD", "SIL", "SP", "UNK"};
  const char* consonants[] = {"B", "CH", "D",  "DH", "F", "G",  "HH", "JH",
                              "K", "L",  "M",  "N",  "NG", "P", "R",  "S",
                              "SH", "T", "TH", "V",  "W",  "Y", "Z",  "ZH"};
  const char* vowels[] = {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
                          "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
  std::vector<std::string> phones;
  for (const char* c : consonants) phones.emplace_back(c);
  for (const char* v : vowels) {
    for (char stress : {'0', '1', '2'}) {
      phones.push_back(std::string(v) + stress);
    }
  }
  std::sort(phones.begin(), phones.end());
  inv.insert(inv.end(), phones.begin(), phones.end());
  return inv;
}

const std::unordered_map<std::string_view, int>& lookup_table() {
  static const auto* table = [] {
    auto* t = new std::unordered_map<std::string_view, int>();
    const auto& inv = phoneme_inventory();
    for (std::size_t i = 0; i < inv.size(); ++i) {
      t->emplace(inv[i], static_cast<int>(i));
    }
    return t;
  }();
  return *table;
}

}  // namespace

const std::vector<std::string>& phoneme_inventory() {
  static const std::vector<std::string> inv = build_inventory();
  return inv;
}

std::size_t inventory_size() { return phoneme_inventory().size(); }

int phoneme_to_id(std::string_view label) {
  const auto& table = lookup_table();
  auto it = table.find(label);
  return it == table.end() ? -1 : it->second;
}

const std::string& id_to_phoneme(int id) {
  const auto& inv = phoneme_inventory();
  if (id < 0 || static_cast<std::size_t>(id) >= inv.size()) {
    throw ValueError("id_to_phoneme: id " + std::to_string(id) +
                     " outside inventory");
  }
  return inv[static_cast<std::size_t>(id)];
}

bool is_silence_id(int id) { return id == kSilId || id == kSpId; }

}  // namespace voxpatch::corpus

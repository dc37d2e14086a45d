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

#include "voxpatch/corpus/alignment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "voxpatch/corpus/inventory.hpp"
#include "voxpatch/errors.hpp"

namespace voxpatch::corpus {

namespace {

using nlohmann::json;

// Forced-alignment boundaries are float seconds; junctions closer than
// this are the same instant.
constexpr double kTimeEps = 1e-6;

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw ParseError(source + ": " + what);
}

double get_seconds(const json& obj, const char* key, const std::string& source,
                   const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    fail(source, where + " missing numeric \"" + key + "\"");
  }
  const double v = obj[key].get<double>();
  if (!std::isfinite(v) || v < 0.0) {
    fail(source, where + " has non-finite or negative \"" + key + "\"");
  }
  return v;
}

void warn(std::vector<std::string>* warnings, std::string msg) {
  if (warnings) warnings->push_back(std::move(msg));
}

}  // namespace

AlignmentRecord parse_alignment_text(const std::string& text,
                                     const std::string& source,
                                     std::vector<std::string>* warnings) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann's message carries the line and column of the defect.
    fail(source, e.what());
  }
  if (!root.is_object()) fail(source, "top level is not a JSON object");
  for (const char* key : {"audio", "sample_rate", "transcript", "phones",
                          "words"}) {
    if (!root.contains(key)) {
      fail(source, std::string("missing required field \"") + key + "\"");
    }
  }
  if (!root["audio"].is_string() || !root["transcript"].is_string() ||
      !root["sample_rate"].is_number_integer() || !root["phones"].is_array() ||
      !root["words"].is_array()) {
    fail(source, "field has the wrong JSON type");
  }

  AlignmentRecord rec;
  rec.audio = root["audio"].get<std::string>();
  rec.sample_rate = root["sample_rate"].get<int>();
  rec.transcript = root["transcript"].get<std::string>();
  if (rec.sample_rate <= 0) fail(source, "sample_rate must be positive");

  for (std::size_t i = 0; i < root["words"].size(); ++i) {
    const auto& w = root["words"][i];
    const std::string where = "words[" + std::to_string(i) + "]";
    if (!w.is_object() || !w.contains("word") || !w["word"].is_string()) {
      fail(source, where + " missing string \"word\"");
    }
    WordInterval wi;
    wi.word = w["word"].get<std::string>();
    wi.start = get_seconds(w, "start", source, where);
    wi.end = get_seconds(w, "end", source, where);
    rec.words.push_back(std::move(wi));
  }

  const int n_words = static_cast<int>(rec.words.size());
  std::vector<PhoneInterval> raw;
  for (std::size_t i = 0; i < root["phones"].size(); ++i) {
    const auto& p = root["phones"][i];
    const std::string where = "phones[" + std::to_string(i) + "]";
    if (!p.is_object() || !p.contains("phone") || !p["phone"].is_string() ||
        !p.contains("word") || !p["word"].is_number_integer()) {
      fail(source, where + " missing \"phone\" (string) or \"word\" (int)");
    }
    PhoneInterval pi;
    pi.phone = p["phone"].get<std::string>();
    pi.start = get_seconds(p, "start", source, where);
    pi.end = get_seconds(p, "end", source, where);
    pi.word = p["word"].get<int>();
    if (pi.end < pi.start) fail(source, where + " ends before it starts");
    if (pi.word < -1 || pi.word >= n_words) {
      fail(source, where + " word index " + std::to_string(pi.word) +
                       " outside words list");
    }
    if (phoneme_to_id(pi.phone) < 0) {
      warn(warnings, source + ": " + where + " unknown phone \"" + pi.phone +
                         "\" mapped to UNK");
      pi.phone = "UNK";
    }
    raw.push_back(std::move(pi));
  }
  if (raw.empty()) fail(source, "phones list is empty");

  // Validate ordering, then repair gaps with SIL so the record tiles
  // [0, final end) with no holes.
  for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
    const std::string where = "phones[" + std::to_string(i + 1) + "]";
    if (raw[i + 1].start < raw[i].start - kTimeEps) {
      fail(source, where + " is not sorted by start time");
    }
    if (raw[i + 1].start < raw[i].end - kTimeEps) {
      fail(source, where + " overlaps the previous interval");
    }
  }

  auto push_sil = [&rec](double start, double end) {
    rec.phones.push_back(PhoneInterval{"SIL", start, end, -1});
  };
  if (raw.front().start > kTimeEps) {
    warn(warnings, source + ": leading gap of " +
                       std::to_string(raw.front().start) +
                       " s filled with SIL");
    push_sil(0.0, raw.front().start);
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i > 0 && raw[i].start > raw[i - 1].end + kTimeEps) {
      warn(warnings, source + ": gap of " +
                         std::to_string(raw[i].start - raw[i - 1].end) +
                         " s before phones[" + std::to_string(i) +
                         "] filled with SIL");
      push_sil(raw[i - 1].end, raw[i].start);
    }
    rec.phones.push_back(std::move(raw[i]));
  }
  return rec;
}

AlignmentRecord parse_alignment(const std::filesystem::path& file,
                                std::vector<std::string>* warnings) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read alignment file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_alignment_text(buf.str(), file.string(), warnings);
}

std::string serialize_alignment(const AlignmentRecord& rec) {
  json root;
  root["audio"] = rec.audio;
  root["sample_rate"] = rec.sample_rate;
  root["transcript"] = rec.transcript;
  root["phones"] = json::array();
  for (const auto& p : rec.phones) {
    root["phones"].push_back({{"phone", p.phone},
                              {"start", p.start},
                              {"end", p.end},
                              {"word", p.word}});
  }
  root["words"] = json::array();
  for (const auto& w : rec.words) {
    root["words"].push_back(
        {{"word", w.word}, {"start", w.start}, {"end", w.end}});
  }
  return root.dump(2) + "\n";
}

bool operator==(const PhoneInterval& a, const PhoneInterval& b) {
  return a.phone == b.phone && a.start == b.start && a.end == b.end &&
         a.word == b.word;
}

bool operator==(const WordInterval& a, const WordInterval& b) {
  return a.word == b.word && a.start == b.start && a.end == b.end;
}

bool operator==(const AlignmentRecord& a, const AlignmentRecord& b) {
  return a.audio == b.audio && a.sample_rate == b.sample_rate &&
         a.transcript == b.transcript && a.phones == b.phones &&
         a.words == b.words;
}

}  // namespace voxpatch::corpus

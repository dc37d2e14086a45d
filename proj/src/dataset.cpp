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

#include "voxpatch/corpus/dataset.hpp"

#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "voxpatch/errors.hpp"

namespace voxpatch::corpus {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + file.string());
  const auto base = file.parent_path();

  std::vector<ManifestEntry> entries;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(file.string() + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
    if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
        !row.contains("alignment") || !row["alignment"].is_string()) {
      throw ParseError(file.string() + ":" + std::to_string(lineno) +
                       ": expected {\"id\": str, \"alignment\": path}");
    }
    entries.push_back(ManifestEntry{
        row["id"].get<std::string>(),
        resolve(base, row["alignment"].get<std::string>())});
  }
  return entries;
}

void align_mel_to_durations(dsp::Mel& mel, int target_frames,
                            const std::string& source) {
  const auto target = static_cast<std::size_t>(target_frames);
  if (target_frames <= 0) {
    throw ParseError(source + ": duration sum is not positive");
  }
  const std::size_t have = mel.frames;
  if (have + 1 < target || have > target + 1) {
    throw ParseError(source + ": alignment covers " +
                     std::to_string(target_frames) + " frames but the audio " +
                     std::to_string(have) +
                     "; the alignment does not cover the audio");
  }
  if (have == target) return;
  if (have > target) {
    mel.data.resize(target * mel.bins);
  } else {
    mel.data.resize(target * mel.bins);
    std::copy(mel.data.begin() +
                  static_cast<std::ptrdiff_t>((have - 1) * mel.bins),
              mel.data.begin() + static_cast<std::ptrdiff_t>(have * mel.bins),
              mel.data.begin() + static_cast<std::ptrdiff_t>(have * mel.bins));
  }
  mel.frames = target;
}

Utterance load_utterance(const std::filesystem::path& alignment_file,
                         const dsp::MelFilterbank& fb,
                         const dsp::StftConfig& cfg,
                         std::vector<std::string>* warnings,
                         const std::filesystem::path& audio_override) {
  Utterance utt;
  utt.rec = parse_alignment(alignment_file, warnings);

  const auto audio_path =
      audio_override.empty()
          ? resolve(alignment_file.parent_path(), utt.rec.audio)
          : audio_override;
  utt.audio = dsp::load_wav(audio_path);
  if (utt.audio.sample_rate != cfg.sample_rate) {
    if (warnings) {
      warnings->push_back(audio_path.string() + ": resampled from " +
                          std::to_string(utt.audio.sample_rate) + " Hz to " +
                          std::to_string(cfg.sample_rate) + " Hz");
    }
    utt.audio = dsp::resample_linear(utt.audio, cfg.sample_rate);
  }

  const double hop_seconds =
      static_cast<double>(cfg.hop) / static_cast<double>(cfg.sample_rate);
  utt.framed = seconds_to_frames(utt.rec, hop_seconds, warnings);
  utt.mel = dsp::wav_to_mel(utt.audio.samples, fb, cfg);
  align_mel_to_durations(utt.mel, utt.framed.durations.total(),
                         alignment_file.string());
  return utt;
}

std::vector<Utterance> load_dataset(const std::filesystem::path& manifest,
                                    const dsp::MelFilterbank& fb,
                                    const dsp::StftConfig& cfg,
                                    std::vector<std::string>* warnings) {
  std::vector<Utterance> utts;
  for (const auto& entry : load_manifest(manifest)) {
    utts.push_back(load_utterance(entry.alignment, fb, cfg, warnings));
    utts.back().id = entry.id;
  }
  return utts;
}

}  // namespace voxpatch::corpus

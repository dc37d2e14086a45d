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

#ifndef VOXPATCH_CHECKPOINT_HPP_
#define VOXPATCH_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

// On-disk archive: a directory holding manifest.json plus params.bin.
// The manifest records metadata and, for each named array, its shape and
// byte offset into the blob. The blob is little-endian f32, arrays packed
// in manifest order (names sorted). Saving a loaded archive reproduces
// the same bytes, so re-serialization is a fixed point.

namespace voxpatch {

struct ArrayRecord {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

struct Archive {
  nlohmann::json meta;  // config, stats, training state; never parameters
  std::vector<ArrayRecord> arrays;

  // Returns the array with this name or throws ValueError.
  const ArrayRecord& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

// Writes manifest.json and params.bin into dir (created if needed).
// Both files land via rename, so a crash cannot leave a torn archive
// behind a valid name.
void save_archive(const std::filesystem::path& dir, const Archive& archive);

// Throws IoError when files are missing, ParseError on malformed content.
Archive load_archive(const std::filesystem::path& dir);

// Mel archives reuse the same container: one array "mel" of shape
// [frames x bins] plus whatever metadata the producer attaches.
void save_mel(const std::filesystem::path& dir, const std::vector<float>& mel,
              std::size_t frames, std::size_t bins,
              const nlohmann::json& extra_meta = nlohmann::json::object());

struct MelArchive {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> data;  // row-major [frames x bins]
  nlohmann::json meta;
};

MelArchive load_mel(const std::filesystem::path& dir);

}  // namespace voxpatch

#endif  // VOXPATCH_CHECKPOINT_HPP_

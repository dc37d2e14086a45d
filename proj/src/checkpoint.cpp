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

#include "voxpatch/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "voxpatch/errors.hpp"

namespace voxpatch {

namespace {

constexpr const char* kFormatTag = "voxpatch-archive-v1";

std::size_t numel_of(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + " -> " + path.string() + ": " +
                        ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path.string());
  return bytes;
}

void append_f32_le(std::string& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
  out.push_back(static_cast<char>((u >> 16) & 0xff));
  out.push_back(static_cast<char>((u >> 24) & 0xff));
}

float read_f32_le(const char* p) {
  const auto b = [&](int i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i]));
  };
  const std::uint32_t u = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
  return std::bit_cast<float>(u);
}

}  // namespace

const ArrayRecord& Archive::get(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw ValueError("archive has no array named '" + name + "'");
}

bool Archive::has(const std::string& name) const {
  return std::any_of(arrays.begin(), arrays.end(),
                     [&](const ArrayRecord& a) { return a.name == name; });
}

void save_archive(const std::filesystem::path& dir, const Archive& archive) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<const ArrayRecord*> order;
  order.reserve(archive.arrays.size());
  for (const auto& a : archive.arrays) order.push_back(&a);
  std::sort(order.begin(), order.end(),
            [](const ArrayRecord* x, const ArrayRecord* y) {
              return x->name < y->name;
            });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->name == order[i - 1]->name) {
      throw ValueError("duplicate array name '" + order[i]->name + "'");
    }
  }

  std::string blob;
  nlohmann::json table = nlohmann::json::array();
  for (const ArrayRecord* a : order) {
    if (a->data.size() != numel_of(a->shape)) {
      throw ValueError("array '" + a->name + "' has " +
                       std::to_string(a->data.size()) + " values for shape");
    }
    nlohmann::json row;
    row["name"] = a->name;
    row["shape"] = a->shape;
    row["offset"] = blob.size();
    row["count"] = a->data.size();
    table.push_back(row);
    blob.reserve(blob.size() + 4 * a->data.size());
    for (float v : a->data) append_f32_le(blob, v);
  }

  nlohmann::json manifest;
  manifest["format"] = kFormatTag;
  manifest["meta"] = archive.meta.is_null() ? nlohmann::json::object()
                                            : archive.meta;
  manifest["arrays"] = table;
  manifest["blob_bytes"] = blob.size();

  write_file_atomic(dir / "params.bin", blob);
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Archive load_archive(const std::filesystem::path& dir) {
  const auto manifest_text = read_file(dir / "manifest.json");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }
  if (!manifest.is_object() || manifest.value("format", "") != kFormatTag) {
    throw ParseError("manifest.json: not a " + std::string(kFormatTag) +
                     " archive");
  }
  const auto blob = read_file(dir / "params.bin");
  if (manifest.contains("blob_bytes") &&
      manifest["blob_bytes"].get<std::size_t>() != blob.size()) {
    throw ParseError("params.bin: expected " +
                     manifest["blob_bytes"].dump() + " bytes, found " +
                     std::to_string(blob.size()));
  }

  Archive out;
  out.meta = manifest.value("meta", nlohmann::json::object());
  if (!manifest.contains("arrays") || !manifest["arrays"].is_array()) {
    throw ParseError("manifest.json: missing arrays table");
  }
  for (const auto& row : manifest["arrays"]) {
    ArrayRecord rec;
    try {
      rec.name = row.at("name").get<std::string>();
      rec.shape = row.at("shape").get<std::vector<std::size_t>>();
      const auto offset = row.at("offset").get<std::size_t>();
      const auto count = row.at("count").get<std::size_t>();
      if (count != numel_of(rec.shape)) {
        throw ParseError("array '" + rec.name + "': count/shape mismatch");
      }
      if (offset + 4 * count > blob.size()) {
        throw ParseError("array '" + rec.name + "' runs past params.bin");
      }
      rec.data.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        rec.data[i] = read_f32_le(blob.data() + offset + 4 * i);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("manifest.json arrays entry: " + std::string(e.what()));
    }
    out.arrays.push_back(std::move(rec));
  }
  return out;
}

void save_mel(const std::filesystem::path& dir, const std::vector<float>& mel,
              std::size_t frames, std::size_t bins,
              const nlohmann::json& extra_meta) {
  if (mel.size() != frames * bins) {
    throw ValueError("mel buffer size " + std::to_string(mel.size()) +
                     " != frames*bins");
  }
  Archive a;
  a.meta = extra_meta.is_null() ? nlohmann::json::object() : extra_meta;
  a.meta["kind"] = "mel";
  a.meta["frames"] = frames;
  a.meta["bins"] = bins;
  a.arrays.push_back({"mel", {frames, bins}, mel});
  save_archive(dir, a);
}

MelArchive load_mel(const std::filesystem::path& dir) {
  Archive a = load_archive(dir);
  if (a.meta.value("kind", "") != "mel") {
    throw ParseError(dir.string() + ": archive is not a mel dump");
  }
  MelArchive out;
  out.frames = a.meta.at("frames").get<std::size_t>();
  out.bins = a.meta.at("bins").get<std::size_t>();
  out.meta = a.meta;
  out.data = a.get("mel").data;
  if (out.data.size() != out.frames * out.bins) {
    throw ParseError(dir.string() + ": mel shape disagrees with metadata");
  }
  return out;
}

}  // namespace voxpatch

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

#include "voxpatch/dsp/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "voxpatch/errors.hpp"

namespace voxpatch::dsp {

namespace {

std::uint32_t read_u32(const char* p) {
  const auto b = [&](int i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i]));
  };
  return b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
}

std::uint16_t read_u16(const char* p) {
  const auto b = [&](int i) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(p[i]));
  };
  return static_cast<std::uint16_t>(b(0) | (b(1) << 8));
}

void append_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path.string());

  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    throw ParseError(path.string() + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t len = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + len > bytes.size()) {
      throw ParseError(path.string() + ": truncated '" + id + "' chunk");
    }
    if (id == "fmt ") {
      if (len < 16) throw ParseError(path.string() + ": short fmt chunk");
      format = read_u16(bytes.data() + pos);
      channels = read_u16(bytes.data() + pos + 2);
      rate = read_u32(bytes.data() + pos + 4);
      bits = read_u16(bytes.data() + pos + 14);
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.data() + pos;
      data_len = len;
    }
    pos += len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw ParseError(path.string() + ": missing fmt or data chunk");
  }
  if (format != 1 || bits != 16) {
    throw ParseError(path.string() + ": only PCM 16-bit supported");
  }
  if (channels != 1) {
    throw ParseError(path.string() + ": expected mono, got " +
                     std::to_string(channels) + " channels");
  }

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  const std::size_t n = data_len / 2;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t s;
    std::memcpy(&s, data + 2 * i, 2);
    clip.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return clip;
}

void save_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t rate = static_cast<std::uint32_t>(clip.sample_rate);

  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  append_u32(out, 36 + 2 * n);
  out += "WAVE";
  out += "fmt ";
  append_u32(out, 16);
  append_u16(out, 1);  // PCM
  append_u16(out, 1);  // mono
  append_u32(out, rate);
  append_u32(out, rate * 2);  // byte rate
  append_u16(out, 2);         // block align
  append_u16(out, 16);        // bits
  out += "data";
  append_u32(out, 2 * n);
  for (float v : clip.samples) {
    const float c = std::clamp(v, -1.0f, 1.0f);
    // symmetric with the /32768 decode, so round trips stay within half a
    // quantization step
    const long q = std::lrint(c * 32768.0f);
    const auto s = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
    append_u16(out, static_cast<std::uint16_t>(s));
  }

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("rename " + tmp + " -> " + path.string() + ": " +
                  ec.message());
  }
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw ValueError("resample: bad target rate");
  if (clip.sample_rate == target_rate || clip.samples.empty()) {
    AudioClip same = clip;
    same.sample_rate = target_rate;
    return same;
  }
  const double ratio =
      static_cast<double>(clip.sample_rate) / static_cast<double>(target_rate);
  const auto out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(clip.samples.size()) / ratio));
  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const std::size_t n = clip.samples.size();
  for (std::size_t i = 0; i < out_len; ++i) {
    const double t = static_cast<double>(i) * ratio;
    const auto lo = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(lo);
    const float a = clip.samples[std::min(lo, n - 1)];
    const float b = clip.samples[std::min(lo + 1, n - 1)];
    out.samples[i] = static_cast<float>((1.0 - frac) * a + frac * b);
  }
  return out;
}

}  // namespace voxpatch::dsp

// Copyright 2026 The specloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// 16-bit PCM mono RIFF/WAVE reading and writing, and corpus discovery.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specloss/dsp_core.hpp"
#include "specloss/error.hpp"

namespace specloss {

struct WavFile {
  Waveform waveform;
  int bit_depth = 16;
  int channels = 1;
};

namespace detail {

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
inline void put_tag(std::vector<unsigned char>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

}  // namespace detail

// Decodes int16 samples as v / 32768.
inline WavFile parse_wav(std::span<const unsigned char> bytes, const std::string& name = "<memory>") {
  auto fail = [&](const char* field, const std::string& msg) {
    return WavFormatError(field, name + ": " + msg);
  };
  if (bytes.size() < 12 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != "RIFF" ||
      std::string_view(reinterpret_cast<const char*>(bytes.data()) + 8, 4) != "WAVE")
    throw fail("riff", "not a RIFF/WAVE file");

  bool have_fmt = false;
  int channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id(reinterpret_cast<const char*>(bytes.data()) + pos, 4);
    const std::uint32_t size = detail::read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw fail("fmt", "truncated fmt chunk");
      const std::uint16_t format = detail::read_u16(bytes.data() + body);
      channels = detail::read_u16(bytes.data() + body + 2);
      rate = detail::read_u32(bytes.data() + body + 4);
      bits = detail::read_u16(bytes.data() + body + 14);
      if (format != 1)
        throw fail("format_code", "unsupported format code " + std::to_string(format) + " (PCM only)");
      if (channels != 1)
        throw fail("channels", "unsupported channel count " + std::to_string(channels) + " (mono only)");
      if (bits != 16)
        throw fail("bit_depth", "unsupported bit depth " + std::to_string(bits) + " (16-bit only)");
      if (rate == 0) throw fail("fmt", "sample rate is zero");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw fail("fmt", "data chunk before fmt chunk");
      if (body + size > bytes.size()) throw fail("data", "truncated data chunk");
      if (size % 2 != 0) throw fail("data", "data chunk size is not a whole number of samples");
      WavFile out;
      out.waveform.sample_rate = static_cast<int>(rate);
      out.waveform.samples.resize(size / 2);
      for (std::size_t i = 0; i < size / 2; ++i) {
        const auto raw = static_cast<std::int16_t>(detail::read_u16(bytes.data() + body + 2 * i));
        out.waveform.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw fail("fmt", "missing fmt chunk");
  throw fail("data", "missing data chunk");
}

inline WavFile read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on " + path.string());
  return parse_wav(bytes, path.string());
}

struct WavEncoding {
  std::vector<unsigned char> bytes;
  std::size_t clipped = 0;  // samples outside [-1, 1]
};

inline std::int16_t quantize_pcm16(double v) {
  const double scaled = std::nearbyint(v * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

inline WavEncoding encode_wav(const Waveform& w) {
  if (w.sample_rate <= 0) throw InvalidArgument("encode_wav: sample rate must be positive");
  WavEncoding enc;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  auto& out = enc.bytes;
  out.reserve(44 + data_bytes);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, 36 + data_bytes);
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  detail::put_tag(out, "data");
  detail::put_u32(out, data_bytes);
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw InvalidArgument("encode_wav: non-finite sample");
    if (v > 1.0 || v < -1.0) ++enc.clipped;
    detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(v)));
  }
  return enc;
}

// Returns the number of samples that had to be hard clipped.
inline std::size_t write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto enc = encode_wav(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(enc.bytes.data()),
            static_cast<std::streamsize>(enc.bytes.size()));
  if (!out) throw IoError("write error on " + path.string());
  return enc.clipped;
}

// Every *.wav below `dir` (recursive), ordered by the byte-wise comparison of
// their generic relative paths.
inline std::vector<std::filesystem::path> scan_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("corpus directory not found: " + dir.string());
  std::vector<std::pair<std::string, fs::path>> found;
  for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file(ec)) continue;
    std::string ext = it->path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext != ".wav") continue;
    found.emplace_back(fs::relative(it->path(), dir).generic_string(), it->path());
  }
  if (ec) throw IoError("error while scanning " + dir.string() + ": " + ec.message());
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<fs::path> out;
  out.reserve(found.size());
  for (auto& [key, p] : found) out.push_back(std::move(p));
  return out;
}

}  // namespace specloss

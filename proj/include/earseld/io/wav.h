// earseld/io/wav.h
//
// Copyright 2026  EarSELD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EARSELD_IO_WAV_H_
#define EARSELD_IO_WAV_H_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "earseld/common.h"

namespace earseld {

// Audio buffer: channels[c][t], float32.
struct AudioBuffer {
  int sample_rate = kSampleRate;
  std::vector<std::vector<float>> channels;

  int num_channels() const { return static_cast<int>(channels.size()); }
  int64_t num_samples() const {
    return channels.empty() ? 0 : static_cast<int64_t>(channels[0].size());
  }
};

namespace wav_detail {

inline void PutU32(std::vector<uint8_t> &b, uint32_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
  b.push_back((v >> 16) & 0xff);
  b.push_back((v >> 24) & 0xff);
}
inline void PutU16(std::vector<uint8_t> &b, uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
}
inline void PutTag(std::vector<uint8_t> &b, const char *tag) {
  b.insert(b.end(), tag, tag + 4);
}

inline uint32_t GetU32(const uint8_t *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}
inline uint16_t GetU16(const uint8_t *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace wav_detail

// Writes IEEE float32 WAV (format tag 3), interleaved.
inline void WriteWav(const std::string &path, const AudioBuffer &audio) {
  using namespace wav_detail;
  const int nch = audio.num_channels();
  const int64_t nsamp = audio.num_samples();
  EARSELD_CHECK(nch > 0, IoError, "WAV write with zero channels: " << path);

  const uint32_t data_bytes = static_cast<uint32_t>(nsamp * nch * 4);
  std::vector<uint8_t> header;
  PutTag(header, "RIFF");
  PutU32(header, 4 + (8 + 18) + (8 + 4) + (8 + data_bytes));
  PutTag(header, "WAVE");
  PutTag(header, "fmt ");
  PutU32(header, 18);
  PutU16(header, 3);  // IEEE float
  PutU16(header, static_cast<uint16_t>(nch));
  PutU32(header, static_cast<uint32_t>(audio.sample_rate));
  PutU32(header, static_cast<uint32_t>(audio.sample_rate) * nch * 4);
  PutU16(header, static_cast<uint16_t>(nch * 4));
  PutU16(header, 32);
  PutU16(header, 0);  // cbSize
  PutTag(header, "fact");
  PutU32(header, 4);
  PutU32(header, static_cast<uint32_t>(nsamp));
  PutTag(header, "data");
  PutU32(header, data_bytes);

  std::ofstream f(path, std::ios::binary);
  EARSELD_CHECK(f.good(), IoError, "cannot open for write: " << path);
  f.write(reinterpret_cast<const char *>(header.data()),
          static_cast<std::streamsize>(header.size()));
  std::vector<float> frame(nch);
  std::vector<float> interleaved(static_cast<size_t>(nsamp) * nch);
  for (int64_t t = 0; t < nsamp; ++t)
    for (int c = 0; c < nch; ++c)
      interleaved[t * nch + c] = audio.channels[c][t];
  f.write(reinterpret_cast<const char *>(interleaved.data()),
          static_cast<std::streamsize>(interleaved.size() * 4));
  EARSELD_CHECK(f.good(), IoError, "short write: " << path);
}

inline AudioBuffer ReadWav(const std::string &path) {
  using namespace wav_detail;
  std::ifstream f(path, std::ios::binary);
  EARSELD_CHECK(f.good(), IoError, "cannot open: " << path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  EARSELD_CHECK(bytes.size() >= 12 && !std::memcmp(bytes.data(), "RIFF", 4) &&
                    !std::memcmp(bytes.data() + 8, "WAVE", 4),
                IoError, "not a RIFF/WAVE file: " << path);

  int nch = 0, rate = 0, fmt = 0, bits = 0;
  const uint8_t *data = nullptr;
  uint32_t data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    uint32_t len = GetU32(bytes.data() + pos + 4);
    const uint8_t *body = bytes.data() + pos + 8;
    if (!std::memcmp(bytes.data() + pos, "fmt ", 4) && len >= 16) {
      fmt = GetU16(body);
      nch = GetU16(body + 2);
      rate = static_cast<int>(GetU32(body + 4));
      bits = GetU16(body + 14);
    } else if (!std::memcmp(bytes.data() + pos, "data", 4)) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  EARSELD_CHECK(data && nch > 0, IoError, "missing fmt/data chunk: " << path);
  EARSELD_CHECK(fmt == 3 && bits == 32, IoError,
                "only float32 WAV supported: " << path);

  AudioBuffer out;
  out.sample_rate = rate;
  int64_t nsamp = data_len / (nch * 4);
  out.channels.assign(nch, std::vector<float>(nsamp));
  for (int64_t t = 0; t < nsamp; ++t)
    for (int c = 0; c < nch; ++c) {
      float v;
      std::memcpy(&v, data + (t * nch + c) * 4, 4);
      out.channels[c][t] = v;
    }
  return out;
}

}  // namespace earseld

#endif  // EARSELD_IO_WAV_H_

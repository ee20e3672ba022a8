// src/signal_io.cc

// Copyright 2026  AVTSE Authors

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

#include "avtse/signal_io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace avtse {

namespace {

// This codebase only targets little-endian hosts; WAV and the feature
// format are little-endian on disk, so payloads are memcpy-compatible.
static_assert(sizeof(float) == 4, "float must be 4 bytes");

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}
uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}
void PutU32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}
void PutU16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

struct WavFormat {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
  size_t data_offset = 0;
  size_t data_size = 0;
};

WavFormat ParseWavHeader(const std::vector<uint8_t>& buf,
                         const std::string& path) {
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("not a RIFF/WAVE file: " + path);
  WavFormat fmt;
  size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= buf.size()) {
    const char* id = reinterpret_cast<const char*>(buf.data() + pos);
    const uint32_t size = ReadU32(buf.data() + pos + 4);
    const size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (body + 16 > buf.size())
        throw std::runtime_error("truncated fmt chunk: " + path);
      fmt.format = ReadU16(buf.data() + body);
      fmt.channels = ReadU16(buf.data() + body + 2);
      fmt.sample_rate = ReadU32(buf.data() + body + 4);
      fmt.bits = ReadU16(buf.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      fmt.data_offset = body;
      fmt.data_size = std::min(static_cast<size_t>(size), buf.size() - body);
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || fmt.data_offset == 0)
    throw std::runtime_error("missing fmt/data chunk: " + path);
  if (fmt.format != 1)
    throw std::runtime_error("unsupported WAV encoding (want linear PCM): " +
                             path);
  if (fmt.bits != 16)
    throw std::runtime_error("unsupported PCM width (want 16-bit): " + path);
  if (fmt.channels == 0 || fmt.sample_rate == 0)
    throw std::runtime_error("malformed WAV header: " + path);
  return fmt;
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  return buf;
}

}  // namespace

Waveform ReadAudio(const std::string& path) {
  const std::vector<uint8_t> buf = ReadFileBytes(path);
  const WavFormat fmt = ParseWavHeader(buf, path);
  const size_t bytes_per_frame = 2u * fmt.channels;
  const int64_t num_frames =
      static_cast<int64_t>(fmt.data_size / bytes_per_frame);
  if (num_frames == 0) throw std::runtime_error("zero-length audio: " + path);
  Waveform w;
  w.sample_rate = static_cast<int>(fmt.sample_rate);
  w.samples.resize(static_cast<size_t>(num_frames));
  const uint8_t* p = buf.data() + fmt.data_offset;
  const double inv = 1.0 / 32767.0;
  for (int64_t i = 0; i < num_frames; ++i) {
    double acc = 0.0;
    for (uint16_t c = 0; c < fmt.channels; ++c) {
      const int16_t s = static_cast<int16_t>(
          ReadU16(p + (static_cast<size_t>(i) * fmt.channels + c) * 2));
      acc += static_cast<double>(s);
    }
    const double v = acc * inv / fmt.channels;
    w.samples[static_cast<size_t>(i)] = std::min(1.0, std::max(-1.0, v));
  }
  return w;
}

WavInfo ReadAudioInfo(const std::string& path) {
  const std::vector<uint8_t> buf = ReadFileBytes(path);
  const WavFormat fmt = ParseWavHeader(buf, path);
  WavInfo info;
  info.sample_rate = static_cast<int>(fmt.sample_rate);
  info.num_samples = static_cast<int64_t>(fmt.data_size / (2u * fmt.channels));
  return info;
}

void WriteAudio(const std::string& path, const Waveform& w) {
  for (double s : w.samples)
    if (!std::isfinite(s))
      throw std::invalid_argument("WriteAudio: non-finite sample");
  std::string out;
  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_bytes = n * 2;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  PutU32(out, 16);
  PutU16(out, 1);  // linear PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<uint32_t>(w.sample_rate));
  PutU32(out, static_cast<uint32_t>(w.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (double s : w.samples) {
    const double clamped = std::min(1.0, std::max(-1.0, s));
    const int32_t q = static_cast<int32_t>(std::lround(clamped * 32767.0));
    PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

FeatureSequence ReadFeatures(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("missing feature header: " + path);
  int64_t frames = -1, channels = -1;
  double rate = -1.0;
  {
    std::istringstream hs(header);
    std::string magic, version, tok;
    hs >> magic >> version;
    if (magic != "AVTSE-FEAT" || version != "v1")
      throw std::runtime_error("malformed feature header: " + path);
    while (hs >> tok) {
      if (tok.rfind("frames=", 0) == 0)
        frames = std::stoll(tok.substr(7));
      else if (tok.rfind("channels=", 0) == 0)
        channels = std::stoll(tok.substr(9));
      else if (tok.rfind("rate=", 0) == 0)
        rate = std::stod(tok.substr(5));
    }
  }
  if (frames < 0 || channels <= 0 || rate <= 0.0)
    throw std::runtime_error("malformed feature header fields: " + path);
  const int64_t count = frames * channels;
  std::vector<float> payload(static_cast<size_t>(count));
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * 4));
  if (in.gcount() != static_cast<std::streamsize>(count * 4))
    throw std::runtime_error("feature payload truncated: " + path);
  char extra;
  if (in.read(&extra, 1))
    throw std::runtime_error("feature payload longer than header declares: " +
                             path);
  FeatureSequence f;
  f.frame_rate = rate;
  f.data = Tensor({frames, channels});
  for (int64_t i = 0; i < count; ++i)
    f.data[i] = static_cast<double>(payload[static_cast<size_t>(i)]);
  return f;
}

void WriteFeatures(const std::string& path, const FeatureSequence& f) {
  if (f.data.Rank() != 2)
    throw std::invalid_argument("WriteFeatures: data must be rank-2");
  if (f.frame_rate <= 0.0)
    throw std::invalid_argument("WriteFeatures: frame_rate must be positive");
  const int64_t frames = f.NumFrames(), channels = f.NumChannels();
  char header[128];
  std::snprintf(header, sizeof(header),
                "AVTSE-FEAT v1 frames=%lld channels=%lld rate=%g\n",
                static_cast<long long>(frames),
                static_cast<long long>(channels), f.frame_rate);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << header;
  std::vector<float> payload(static_cast<size_t>(frames * channels));
  for (int64_t i = 0; i < frames * channels; ++i)
    payload[static_cast<size_t>(i)] = static_cast<float>(f.data[i]);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * 4));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace avtse

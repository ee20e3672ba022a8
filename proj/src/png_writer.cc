// src/png_writer.cc

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

#include "avtse/png_writer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace avtse {

namespace {

uint32_t Crc32(const uint8_t* data, size_t len, uint32_t crc = 0xffffffffu) {
  static uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    init = true;
  }
  for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc;
}

uint32_t Adler32(const uint8_t* data, size_t len) {
  uint32_t a = 1, b = 0;
  for (size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

void PutU32BE(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x >> 24));
  v.push_back(static_cast<uint8_t>(x >> 16));
  v.push_back(static_cast<uint8_t>(x >> 8));
  v.push_back(static_cast<uint8_t>(x));
}

void WriteChunk(std::ofstream& out, const char type[4],
                const std::vector<uint8_t>& body) {
  std::vector<uint8_t> head;
  PutU32BE(head, static_cast<uint32_t>(body.size()));
  out.write(reinterpret_cast<const char*>(head.data()), 4);
  std::vector<uint8_t> type_and_body;
  type_and_body.insert(type_and_body.end(), type, type + 4);
  type_and_body.insert(type_and_body.end(), body.begin(), body.end());
  out.write(reinterpret_cast<const char*>(type_and_body.data()),
            static_cast<std::streamsize>(type_and_body.size()));
  std::vector<uint8_t> crc;
  PutU32BE(crc, Crc32(type_and_body.data(), type_and_body.size()) ^ 0xffffffffu);
  out.write(reinterpret_cast<const char*>(crc.data()), 4);
}

}  // namespace

void WritePng(const std::string& path, const std::vector<uint8_t>& rgb,
              int width, int height) {
  if (width <= 0 || height <= 0 ||
      rgb.size() != static_cast<size_t>(width) * height * 3)
    throw std::invalid_argument("WritePng: bad dimensions");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<uint8_t> ihdr;
  PutU32BE(ihdr, static_cast<uint32_t>(width));
  PutU32BE(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type RGB
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  WriteChunk(out, "IHDR", ihdr);

  // Raw scanlines: filter byte 0 + RGB row.
  std::vector<uint8_t> raw;
  raw.reserve(static_cast<size_t>(height) * (1 + 3 * static_cast<size_t>(width)));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const uint8_t* row = rgb.data() + static_cast<size_t>(y) * width * 3;
    raw.insert(raw.end(), row, row + static_cast<size_t>(width) * 3);
  }

  // zlib stream with stored deflate blocks.
  std::vector<uint8_t> idat;
  idat.push_back(0x78);
  idat.push_back(0x01);
  size_t pos = 0;
  while (pos < raw.size() || raw.empty()) {
    const size_t chunk = std::min<size_t>(65535, raw.size() - pos);
    const bool final = pos + chunk == raw.size();
    idat.push_back(final ? 1 : 0);
    idat.push_back(static_cast<uint8_t>(chunk & 0xff));
    idat.push_back(static_cast<uint8_t>(chunk >> 8));
    idat.push_back(static_cast<uint8_t>(~chunk & 0xff));
    idat.push_back(static_cast<uint8_t>((~chunk >> 8) & 0xff));
    idat.insert(idat.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos),
                raw.begin() + static_cast<std::ptrdiff_t>(pos + chunk));
    pos += chunk;
    if (raw.empty()) break;
  }
  PutU32BE(idat, Adler32(raw.data(), raw.size()));
  WriteChunk(out, "IDAT", idat);
  WriteChunk(out, "IEND", {});
  if (!out) throw std::runtime_error("write failed: " + path);
}

void Colormap(double v, uint8_t* r, uint8_t* g, uint8_t* b) {
  v = std::min(1.0, std::max(0.0, v));
  // Compact magma-like ramp through a handful of anchors.
  static const double anchors[][3] = {
      {0.00, 0.00, 0.02}, {0.18, 0.05, 0.35}, {0.45, 0.10, 0.55},
      {0.71, 0.21, 0.47}, {0.93, 0.41, 0.27}, {0.99, 0.70, 0.18},
      {0.99, 0.99, 0.75},
  };
  const int n = 6;
  const double x = v * n;
  const int i = std::min(n - 1, static_cast<int>(x));
  const double f = x - i;
  auto lerp = [&](int c) {
    return anchors[i][c] + f * (anchors[i + 1][c] - anchors[i][c]);
  };
  *r = static_cast<uint8_t>(std::lround(lerp(0) * 255.0));
  *g = static_cast<uint8_t>(std::lround(lerp(1) * 255.0));
  *b = static_cast<uint8_t>(std::lround(lerp(2) * 255.0));
}

}  // namespace avtse

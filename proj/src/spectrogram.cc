// src/spectrogram.cc

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

#include "avtse/spectrogram.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "avtse/dsp.h"
#include "avtse/png_writer.h"

namespace avtse {

void WriteSpectrogramPng(const std::string& path, const Waveform& w) {
  const int64_t nfft = 512;
  const int64_t hop = std::max<int64_t>(1, w.sample_rate / 100);  // 10 ms
  const std::vector<double> win = dsp::HanningWindow(nfft);
  const Tensor mag = dsp::StftMagnitude(w.samples, win, hop, nfft);
  const int64_t frames = mag.Dim(0);
  const int64_t bins = mag.Dim(1);
  if (frames < 1)
    throw std::invalid_argument("spectrogram: signal shorter than one frame");

  // Full-scale reference: a unit sine under this window peaks near nfft/4.
  const double full_scale = static_cast<double>(nfft) / 4.0;
  const double db_floor = -80.0;
  std::vector<uint8_t> rgb(static_cast<size_t>(frames * bins * 3));
  for (int64_t f = 0; f < frames; ++f) {
    for (int64_t b = 0; b < bins; ++b) {
      const double db =
          20.0 * std::log10(mag[f * bins + b] / full_scale + 1e-10);
      const double v = (std::min(0.0, std::max(db_floor, db)) - db_floor) /
                       (-db_floor);
      // Row 0 is the top of the image = highest frequency.
      const int64_t row = bins - 1 - b;
      uint8_t* px = rgb.data() + (row * frames + f) * 3;
      Colormap(v, px, px + 1, px + 2);
    }
  }
  WritePng(path, rgb, static_cast<int>(frames), static_cast<int>(bins));
}

}  // namespace avtse

// include/avtse/spectrogram.h

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

#ifndef AVTSE_SPECTROGRAM_H_
#define AVTSE_SPECTROGRAM_H_

#include <string>

#include "avtse/signal_io.h"

namespace avtse {

/// Renders a log-magnitude spectrogram PNG: 512-point DFT, 10 ms hop,
/// fixed -80..0 dB color scale relative to digital full scale. Frequency
/// runs bottom-up, time left to right.
void WriteSpectrogramPng(const std::string& path, const Waveform& w);

}  // namespace avtse

#endif  // AVTSE_SPECTROGRAM_H_

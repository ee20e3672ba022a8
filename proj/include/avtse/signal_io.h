// include/avtse/signal_io.h

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

#ifndef AVTSE_SIGNAL_IO_H_
#define AVTSE_SIGNAL_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "avtse/tensor.h"

namespace avtse {

/// Mono audio signal, nominal amplitude range [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  int64_t NumSamples() const { return static_cast<int64_t>(samples.size()); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Time-major real matrix [frames x channels] with a frame rate.
struct FeatureSequence {
  Tensor data;  // rank-2, [frames x channels]
  double frame_rate = 0.0;

  FeatureSequence() = default;
  FeatureSequence(Tensor d, double rate) : data(std::move(d)), frame_rate(rate) {}

  int64_t NumFrames() const { return data.Rank() == 2 ? data.Dim(0) : 0; }
  int64_t NumChannels() const { return data.Rank() == 2 ? data.Dim(1) : 0; }
};

/// Reads a linear PCM WAV file (16-bit). Multi-channel input is averaged to
/// mono; samples are scaled to [-1, 1]. Throws on missing files, unsupported
/// encodings, or zero-length audio.
Waveform ReadAudio(const std::string& path);

/// Writes 16-bit PCM WAV at w.sample_rate. Values are clamped to [-1, 1]
/// before quantization with round(x * 32767).
void WriteAudio(const std::string& path, const Waveform& w);

/// Header-only probe: returns (num_samples_per_channel, sample_rate).
struct WavInfo {
  int64_t num_samples = 0;
  int sample_rate = 0;
};
WavInfo ReadAudioInfo(const std::string& path);

/// Feature file format:
///   ASCII header "AVTSE-FEAT v1 frames=<int> channels=<int> rate=<decimal>\n"
///   followed by frames*channels little-endian float32 values, row-major.
FeatureSequence ReadFeatures(const std::string& path);
void WriteFeatures(const std::string& path, const FeatureSequence& f);

}  // namespace avtse

#endif  // AVTSE_SIGNAL_IO_H_

// include/avtse/model_config.h

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

#ifndef AVTSE_MODEL_CONFIG_H_
#define AVTSE_MODEL_CONFIG_H_

#include <cstdint>
#include <string>

namespace avtse {

/// Network hyperparameters. Full-scale defaults use encoder/bottleneck/conv
/// sizes (256, 40, 256, 512, 3, 7) with 4 extractor iterations.
struct ModelConfig {
  int64_t encoder_channels = 256;   // filters in the learned speech encoder
  int64_t encoder_kernel = 40;      // encoder kernel in samples; stride is half
  int64_t bottleneck_channels = 256;
  int64_t conv_channels = 512;      // width inside each dilated conv block
  int64_t conv_kernel = 3;          // odd, so dilated blocks keep length
  int64_t conv_blocks = 7;          // dilation doubles per block
  int64_t extractor_iterations = 4; // R; weights are shared across iterations
  int64_t visual_channels = 512;    // raw visual feature width
  int64_t av_width = 768;           // transformer width in the cue encoder
  int64_t av_layers = 4;
  int64_t av_heads = 12;
  int64_t mar_layers = 4;
  int sample_rate = 16000;
  int video_fps = 25;
  int64_t max_cue_positions = 256;   // learned position table (25 fps side)
  int64_t max_mar_positions = 8192;  // learned position table (embedding side)

  int64_t Stride() const { return encoder_kernel / 2; }
  double EmbeddingRate() const {
    return static_cast<double>(sample_rate) / static_cast<double>(Stride());
  }
  /// Audio-visual rate ratio: embedding frames per video frame (32 at
  /// defaults). Must be a power of two; the duration adapter halves the
  /// rate log2(ratio) times with kernel-2 stride-2 convolutions.
  int64_t UpsampleFactor() const {
    return sample_rate / (Stride() * video_fps);
  }
  int64_t DurationAdapterLayers() const;

  void Validate() const;

  std::string ToJsonString() const;
  static ModelConfig FromJsonString(const std::string& s);
};

}  // namespace avtse

#endif  // AVTSE_MODEL_CONFIG_H_

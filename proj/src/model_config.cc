// src/model_config.cc

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

#include "avtse/model_config.h"

#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace avtse {

int64_t ModelConfig::DurationAdapterLayers() const {
  int64_t ratio = UpsampleFactor();
  int64_t layers = 0;
  while (ratio > 1) {
    ratio >>= 1;
    ++layers;
  }
  return layers;
}

void ModelConfig::Validate() const {
  if (encoder_kernel < 2 || encoder_kernel % 2 != 0)
    throw std::invalid_argument("ModelConfig: encoder_kernel must be even");
  if (sample_rate <= 0 || video_fps <= 0)
    throw std::invalid_argument("ModelConfig: rates must be positive");
  if (sample_rate % (Stride() * video_fps) != 0)
    throw std::invalid_argument(
        "ModelConfig: sample_rate/(stride*video_fps) must be an integer");
  const int64_t ratio = UpsampleFactor();
  if (ratio < 2 || (ratio & (ratio - 1)) != 0)
    throw std::invalid_argument(
        "ModelConfig: audio-visual rate ratio must be a power of two >= 2");
  if (extractor_iterations < 1)
    throw std::invalid_argument("ModelConfig: extractor_iterations >= 1");
  if (av_layers < 1 || mar_layers < 1)
    throw std::invalid_argument("ModelConfig: transformer stacks need layers");
  if (av_heads < 1 || av_width % av_heads != 0)
    throw std::invalid_argument("ModelConfig: av_heads must divide av_width");
  if (conv_kernel % 2 != 1)
    throw std::invalid_argument("ModelConfig: conv_kernel must be odd");
  if (encoder_channels < 1 || bottleneck_channels < 1 || conv_channels < 1 ||
      conv_blocks < 1 || visual_channels < 1 || av_width < 1)
    throw std::invalid_argument("ModelConfig: sizes must be positive");
}

std::string ModelConfig::ToJsonString() const {
  json j;
  j["encoder_channels"] = encoder_channels;
  j["encoder_kernel"] = encoder_kernel;
  j["bottleneck_channels"] = bottleneck_channels;
  j["conv_channels"] = conv_channels;
  j["conv_kernel"] = conv_kernel;
  j["conv_blocks"] = conv_blocks;
  j["extractor_iterations"] = extractor_iterations;
  j["visual_channels"] = visual_channels;
  j["av_width"] = av_width;
  j["av_layers"] = av_layers;
  j["av_heads"] = av_heads;
  j["mar_layers"] = mar_layers;
  j["sample_rate"] = sample_rate;
  j["video_fps"] = video_fps;
  j["max_cue_positions"] = max_cue_positions;
  j["max_mar_positions"] = max_mar_positions;
  return j.dump();
}

ModelConfig ModelConfig::FromJsonString(const std::string& s) {
  json j = json::parse(s);
  ModelConfig c;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("encoder_channels", c.encoder_channels);
  get("encoder_kernel", c.encoder_kernel);
  get("bottleneck_channels", c.bottleneck_channels);
  get("conv_channels", c.conv_channels);
  get("conv_kernel", c.conv_kernel);
  get("conv_blocks", c.conv_blocks);
  get("extractor_iterations", c.extractor_iterations);
  get("visual_channels", c.visual_channels);
  get("av_width", c.av_width);
  get("av_layers", c.av_layers);
  get("av_heads", c.av_heads);
  get("mar_layers", c.mar_layers);
  get("sample_rate", c.sample_rate);
  get("video_fps", c.video_fps);
  get("max_cue_positions", c.max_cue_positions);
  get("max_mar_positions", c.max_mar_positions);
  c.Validate();
  return c;
}

}  // namespace avtse

// include/avtse/png_writer.h

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

#ifndef AVTSE_PNG_WRITER_H_
#define AVTSE_PNG_WRITER_H_

#include <cstdint>
#include <string>
#include <vector>

namespace avtse {

/// Minimal PNG encoder: 8-bit RGB, stored (uncompressed) deflate blocks.
/// rgb is row-major, 3 bytes per pixel, top row first.
void WritePng(const std::string& path, const std::vector<uint8_t>& rgb,
              int width, int height);

/// Maps v in [0,1] to a perceptual dark-to-bright color ramp.
void Colormap(double v, uint8_t* r, uint8_t* g, uint8_t* b);

}  // namespace avtse

#endif  // AVTSE_PNG_WRITER_H_

// include/avtse/masked_region.h

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

#ifndef AVTSE_MASKED_REGION_H_
#define AVTSE_MASKED_REGION_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "avtse/signal_io.h"

namespace avtse {

/// Complementary frame selectors at embedding resolution. masked[j] = 1
/// marks a zero-masked frame (the inverse-mask selector); unmasked is the
/// complement, so masked[j] + unmasked[j] == 1 for every frame.
struct MaskPair {
  std::vector<uint8_t> masked;
  std::vector<uint8_t> unmasked;
  int64_t stride_samples = 0;
  int64_t kernel_samples = 0;

  int64_t NumFrames() const { return static_cast<int64_t>(masked.size()); }
  int64_t NumMasked() const {
    int64_t n = 0;
    for (uint8_t b : masked) n += b;
    return n;
  }
};

/// Finds zero-masked regions from the bias-free encoder output before
/// rectification. A frame is a zero frame iff its largest channel magnitude
/// is at most 1e-6 of the sequence's global peak (floored at 1e-12, so the
/// test is scale-invariant). Runs shorter than
/// max(1, threshold_samples / stride_samples) frames are discarded as
/// incidental. An all-zero sequence is rejected as degenerate.
MaskPair DetectMaskedFrames(const FeatureSequence& pre_activation,
                            int64_t threshold_samples, int64_t stride_samples,
                            int64_t kernel_samples);

/// Splits X into (masked_part, unmasked_part) by broadcasting the selectors
/// over channels. The two parts sum back to X bit-for-bit. Lengths may
/// differ; the shorter of (X, mp) wins.
std::pair<FeatureSequence, FeatureSequence> SplitByMask(
    const FeatureSequence& x, const MaskPair& mp);

}  // namespace avtse

#endif  // AVTSE_MASKED_REGION_H_

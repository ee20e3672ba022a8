// src/masked_region.cc

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

#include "avtse/masked_region.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace avtse {

MaskPair DetectMaskedFrames(const FeatureSequence& pre_activation,
                            int64_t threshold_samples, int64_t stride_samples,
                            int64_t kernel_samples) {
  const int64_t T = pre_activation.NumFrames();
  const int64_t C = pre_activation.NumChannels();
  if (T == 0 || C == 0)
    throw std::invalid_argument("DetectMaskedFrames: empty sequence");
  if (stride_samples <= 0)
    throw std::invalid_argument("DetectMaskedFrames: bad stride");

  double global_max = 0.0;
  std::vector<double> frame_max(static_cast<size_t>(T), 0.0);
  for (int64_t t = 0; t < T; ++t) {
    double m = 0.0;
    for (int64_t c = 0; c < C; ++c)
      m = std::max(m, std::abs(pre_activation.data[t * C + c]));
    frame_max[static_cast<size_t>(t)] = m;
    global_max = std::max(global_max, m);
  }
  if (global_max == 0.0)
    throw std::domain_error(
        "DetectMaskedFrames: all-zero input is degenerate (no reference "
        "level to detect against)");

  const double eps = 1e-6 * std::max(global_max, 1e-12);
  const int64_t min_run =
      std::max<int64_t>(1, threshold_samples / stride_samples);

  MaskPair mp;
  mp.stride_samples = stride_samples;
  mp.kernel_samples = kernel_samples;
  mp.masked.assign(static_cast<size_t>(T), 0);
  mp.unmasked.assign(static_cast<size_t>(T), 1);

  int64_t run_start = -1;
  auto close_run = [&](int64_t end) {
    if (run_start < 0) return;
    if (end - run_start >= min_run)
      for (int64_t j = run_start; j < end; ++j) {
        mp.masked[static_cast<size_t>(j)] = 1;
        mp.unmasked[static_cast<size_t>(j)] = 0;
      }
    run_start = -1;
  };
  for (int64_t t = 0; t < T; ++t) {
    if (frame_max[static_cast<size_t>(t)] <= eps) {
      if (run_start < 0) run_start = t;
    } else {
      close_run(t);
    }
  }
  close_run(T);
  return mp;
}

std::pair<FeatureSequence, FeatureSequence> SplitByMask(
    const FeatureSequence& x, const MaskPair& mp) {
  const int64_t T = std::min(x.NumFrames(), mp.NumFrames());
  const int64_t C = x.NumChannels();
  FeatureSequence masked_part, unmasked_part;
  masked_part.frame_rate = x.frame_rate;
  unmasked_part.frame_rate = x.frame_rate;
  masked_part.data = Tensor({T, C});
  unmasked_part.data = Tensor({T, C});
  for (int64_t t = 0; t < T; ++t) {
    const bool m = mp.masked[static_cast<size_t>(t)] != 0;
    for (int64_t c = 0; c < C; ++c) {
      const double v = x.data[t * C + c];
      if (m)
        masked_part.data[t * C + c] = v;
      else
        unmasked_part.data[t * C + c] = v;
    }
  }
  return {std::move(masked_part), std::move(unmasked_part)};
}

}  // namespace avtse

// include/avtse/rng.h

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

#ifndef AVTSE_RNG_H_
#define AVTSE_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace avtse {

/// Deterministic random source. All sampling is derived from raw mt19937_64
/// draws so that sequences are identical across platforms and compilers
/// (std::uniform_real_distribution and friends are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  /// Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Uniform integer in [0, n).
  int64_t UniformInt(int64_t n) {
    // Rejection-free modulo is fine here; n is tiny relative to 2^64.
    return static_cast<int64_t>(engine_() % static_cast<uint64_t>(n));
  }

  /// Standard normal via Box-Muller.
  double Normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = Uniform();
    double u2 = Uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  /// Normal truncated to +/- 2 sigma (resampled), scaled by sigma.
  double TruncNormal(double sigma) {
    double x = Normal();
    while (std::abs(x) > 2.0) x = Normal();
    return x * sigma;
  }

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace avtse

#endif  // AVTSE_RNG_H_

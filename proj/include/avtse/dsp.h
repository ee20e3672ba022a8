// include/avtse/dsp.h

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

#ifndef AVTSE_DSP_H_
#define AVTSE_DSP_H_

#include <complex>
#include <cstdint>
#include <vector>

#include "avtse/tensor.h"

namespace avtse {
namespace dsp {

/// In-place iterative radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>>& x, bool inverse = false);

/// Periodogram-style magnitude spectrum of a real signal chunk, zero-padded
/// to nfft (power of two). Returns nfft/2+1 magnitudes.
std::vector<double> MagnitudeSpectrum(const std::vector<double>& x,
                                      int64_t nfft);

/// MATLAB-style "hanning" window of length n (no zero endpoints).
std::vector<double> HanningWindow(int64_t n);

/// Polyphase rational resampler: output rate = in_rate * up / down.
/// Windowed-sinc low-pass at min(pi/up, pi/down).
std::vector<double> Resample(const std::vector<double>& x, int64_t up,
                             int64_t down, int64_t taps_per_phase = 10);

/// STFT magnitudes: frames of win.size() samples, hop samples apart,
/// windowed and zero-padded to nfft. Returns [num_frames x (nfft/2+1)].
Tensor StftMagnitude(const std::vector<double>& x,
                     const std::vector<double>& win, int64_t hop, int64_t nfft);

}  // namespace dsp
}  // namespace avtse

#endif  // AVTSE_DSP_H_

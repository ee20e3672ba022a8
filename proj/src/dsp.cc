// src/dsp.cc

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

#include "avtse/dsp.h"

#include <cmath>
#include <stdexcept>

namespace avtse {
namespace dsp {

void Fft(std::vector<std::complex<double>>& x, bool inverse) {
  const size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("Fft: size must be a power of two");
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = x[i + j];
        const std::complex<double> v = x[i + j + len / 2] * w;
        x[i + j] = u + v;
        x[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= inv;
  }
}

std::vector<double> MagnitudeSpectrum(const std::vector<double>& x,
                                      int64_t nfft) {
  std::vector<std::complex<double>> buf(static_cast<size_t>(nfft));
  const size_t n = std::min(x.size(), static_cast<size_t>(nfft));
  for (size_t i = 0; i < n; ++i) buf[i] = x[i];
  Fft(buf);
  std::vector<double> mag(static_cast<size_t>(nfft / 2 + 1));
  for (size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(buf[i]);
  return mag;
}

std::vector<double> HanningWindow(int64_t n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i + 1) /
                              static_cast<double>(n + 1)));
  return w;
}

std::vector<double> Resample(const std::vector<double>& x, int64_t up,
                             int64_t down, int64_t taps_per_phase) {
  if (up < 1 || down < 1) throw std::invalid_argument("Resample: bad ratio");
  if (up == down) return x;
  // Low-pass prototype: windowed sinc, cutoff at min(1/up, 1/down) of the
  // upsampled Nyquist, gain up (compensates zero-stuffing).
  const int64_t half = taps_per_phase * std::max(up, down);
  const int64_t len = 2 * half + 1;
  const double fc = 0.5 / static_cast<double>(std::max(up, down));
  std::vector<double> h(static_cast<size_t>(len));
  for (int64_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i - half);
    const double sinc =
        t == 0.0 ? 2.0 * fc : std::sin(2.0 * M_PI * fc * t) / (M_PI * t);
    const double win =
        0.5 * (1.0 + std::cos(M_PI * t / static_cast<double>(half + 1)));
    h[static_cast<size_t>(i)] = sinc * win * static_cast<double>(up);
  }
  const int64_t n_in = static_cast<int64_t>(x.size());
  const int64_t n_out = (n_in * up) / down;
  std::vector<double> y(static_cast<size_t>(n_out), 0.0);
  for (int64_t m = 0; m < n_out; ++m) {
    // Output sample m sits at position m*down on the up-rate grid; only
    // every up-th up-rate sample is a real input sample.
    const int64_t center = m * down;
    double acc = 0.0;
    for (int64_t k = -half; k <= half; ++k) {
      const int64_t pos = center + k;
      if (pos % up != 0) continue;
      const int64_t n = pos / up;
      if (n < 0 || n >= n_in) continue;
      acc += x[static_cast<size_t>(n)] * h[static_cast<size_t>(half - k)];
    }
    y[static_cast<size_t>(m)] = acc;
  }
  return y;
}

Tensor StftMagnitude(const std::vector<double>& x,
                     const std::vector<double>& win, int64_t hop,
                     int64_t nfft) {
  const int64_t wlen = static_cast<int64_t>(win.size());
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t num_frames = n < wlen ? 0 : (n - wlen) / hop + 1;
  Tensor out({num_frames, nfft / 2 + 1});
  std::vector<std::complex<double>> buf;
  for (int64_t f = 0; f < num_frames; ++f) {
    buf.assign(static_cast<size_t>(nfft), {0.0, 0.0});
    for (int64_t i = 0; i < wlen; ++i)
      buf[static_cast<size_t>(i)] = x[static_cast<size_t>(f * hop + i)] *
                                    win[static_cast<size_t>(i)];
    Fft(buf);
    for (int64_t b = 0; b <= nfft / 2; ++b)
      out[f * (nfft / 2 + 1) + b] = std::abs(buf[static_cast<size_t>(b)]);
  }
  return out;
}

}  // namespace dsp
}  // namespace avtse

// src/kernels.cc

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

// Conv weights are stored [out][in][k]; the workers below transpose them
// into k-major scratch so every inner loop runs over contiguous memory.
// Parallel variants split independent output rows across threads and never
// reorder a reduction, so serial and OpenMP results are bitwise identical.

#include "avtse/kernels.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace avtse {
namespace kernels {

namespace {
bool g_parallel = true;

// Four-lane reduction: fixed association, so results are reproducible while
// the compiler can still vectorize the independent partial sums.
inline double DotN(const double* __restrict__ a, const double* __restrict__ b,
                   int64_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void AxpyN(double* __restrict__ y, const double* __restrict__ x,
                  double a, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}
}  // namespace

bool ParallelEnabled() { return g_parallel; }
void SetParallel(bool enabled) { g_parallel = enabled; }
int NumThreads() { return omp_get_max_threads(); }
void SetNumThreads(int n) { omp_set_num_threads(n); }

#define AVTSE_ROW_LOOP(COUNT, BODY)            \
  if (g_parallel) {                            \
    _Pragma("omp parallel for schedule(static)") \
    for (int64_t r_ = 0; r_ < (COUNT); ++r_) { \
      BODY(r_);                                \
    }                                          \
  } else {                                     \
    for (int64_t r_ = 0; r_ < (COUNT); ++r_) { \
      BODY(r_);                                \
    }                                          \
  }

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

void Conv1dForward(const double* x, int64_t T, int64_t Ci, const double* w,
                   int64_t Co, int64_t K, const double* bias, int64_t stride,
                   int64_t dil, int64_t pad, double* y, int64_t To) {
  if (Ci == 1 && dil == 1 && pad == 0) {
    // Waveform front end: x windows and w rows are both contiguous.
    auto row = [&](int64_t t) {
      const double* xwin = x + t * stride;
      double* yrow = y + t * Co;
      const int64_t kmax = std::min<int64_t>(K, T - t * stride);
      for (int64_t co = 0; co < Co; ++co)
        yrow[co] = (bias ? bias[co] : 0.0) + DotN(xwin, w + co * K, kmax);
    };
    AVTSE_ROW_LOOP(To, row);
    return;
  }
  // k-major transpose: wt[k][co][ci]
  std::vector<double> wt(static_cast<size_t>(K * Co * Ci));
  for (int64_t co = 0; co < Co; ++co)
    for (int64_t ci = 0; ci < Ci; ++ci)
      for (int64_t k = 0; k < K; ++k)
        wt[static_cast<size_t>((k * Co + co) * Ci + ci)] =
            w[(co * Ci + ci) * K + k];
  auto row = [&](int64_t t) {
    double* yrow = y + t * Co;
    for (int64_t co = 0; co < Co; ++co) yrow[co] = bias ? bias[co] : 0.0;
    const int64_t base = t * stride - pad;
    for (int64_t k = 0; k < K; ++k) {
      const int64_t u = base + k * dil;
      if (u < 0 || u >= T) continue;
      const double* xrow = x + u * Ci;
      const double* wk = wt.data() + k * Co * Ci;
      for (int64_t co = 0; co < Co; ++co)
        yrow[co] += DotN(xrow, wk + co * Ci, Ci);
    }
  };
  AVTSE_ROW_LOOP(To, row);
}

void Conv1dBackwardInput(const double* dy, int64_t To, int64_t Co,
                         const double* w, int64_t Ci, int64_t K, int64_t stride,
                         int64_t dil, int64_t pad, double* dx, int64_t T) {
  // k-major transpose: wt[k][ci][co]
  std::vector<double> wt(static_cast<size_t>(K * Ci * Co));
  for (int64_t co = 0; co < Co; ++co)
    for (int64_t ci = 0; ci < Ci; ++ci)
      for (int64_t k = 0; k < K; ++k)
        wt[static_cast<size_t>((k * Ci + ci) * Co + co)] =
            w[(co * Ci + ci) * K + k];
  // Gather form: each input row is written by exactly one iteration.
  auto row = [&](int64_t u) {
    double* dxrow = dx + u * Ci;
    for (int64_t k = 0; k < K; ++k) {
      const int64_t num = u + pad - k * dil;
      if (num < 0 || num % stride != 0) continue;
      const int64_t t = num / stride;
      if (t < 0 || t >= To) continue;
      const double* dyrow = dy + t * Co;
      const double* wk = wt.data() + k * Ci * Co;
      for (int64_t ci = 0; ci < Ci; ++ci)
        dxrow[ci] += DotN(dyrow, wk + ci * Co, Co);
    }
  };
  AVTSE_ROW_LOOP(T, row);
}

void Conv1dBackwardWeight(const double* x, int64_t T, int64_t Ci,
                          const double* dy, int64_t To, int64_t Co, int64_t K,
                          int64_t stride, int64_t dil, int64_t pad, double* dw,
                          double* db) {
  // Parallel over output channels; per-channel scratch is k-major [k][ci]
  // so the inner update is one contiguous axpy per tap.
  auto channel = [&](int64_t co) {
    std::vector<double> local(static_cast<size_t>(K * Ci), 0.0);
    double dbias = 0.0;
    for (int64_t t = 0; t < To; ++t) {
      const double g = dy[t * Co + co];
      dbias += g;
      if (g == 0.0) continue;
      const int64_t base = t * stride - pad;
      if (base >= 0 && base + (K - 1) * dil < T && dil == 1) {
        AxpyN(local.data(), x + base * Ci, g, K * Ci);
      } else {
        for (int64_t k = 0; k < K; ++k) {
          const int64_t u = base + k * dil;
          if (u < 0 || u >= T) continue;
          AxpyN(local.data() + k * Ci, x + u * Ci, g, Ci);
        }
      }
    }
    for (int64_t ci = 0; ci < Ci; ++ci)
      for (int64_t k = 0; k < K; ++k)
        dw[(co * Ci + ci) * K + k] += local[static_cast<size_t>(k * Ci + ci)];
    if (db) db[co] += dbias;
  };
  AVTSE_ROW_LOOP(Co, channel);
}

// ---------------------------------------------------------------------------
// Transposed Conv1d
// ---------------------------------------------------------------------------

void ConvT1dForward(const double* x, int64_t T, int64_t Ci, const double* w,
                    int64_t Co, int64_t K, int64_t stride, double* y,
                    int64_t To) {
  if (Co == 1) {
    // Decoder: per output sample, a handful of (t, k) pairs each needing a
    // contiguous dot over input channels against a k-major weight slice.
    std::vector<double> wt(static_cast<size_t>(K * Ci));
    for (int64_t ci = 0; ci < Ci; ++ci)
      for (int64_t k = 0; k < K; ++k)
        wt[static_cast<size_t>(k * Ci + ci)] = w[ci * K + k];
    auto row = [&](int64_t u) {
      double acc = 0.0;
      const int64_t t_hi = std::min(u / stride, T - 1);
      const int64_t t_lo = std::max<int64_t>(0, (u - K + stride) / stride);
      for (int64_t t = t_lo; t <= t_hi; ++t) {
        const int64_t k = u - t * stride;
        if (k < 0 || k >= K) continue;
        acc += DotN(x + t * Ci, wt.data() + k * Ci, Ci);
      }
      y[u] = acc;
    };
    AVTSE_ROW_LOOP(To, row);
    return;
  }
  std::vector<double> wt(static_cast<size_t>(K * Co * Ci));  // [k][co][ci]
  for (int64_t ci = 0; ci < Ci; ++ci)
    for (int64_t co = 0; co < Co; ++co)
      for (int64_t k = 0; k < K; ++k)
        wt[static_cast<size_t>((k * Co + co) * Ci + ci)] =
            w[(ci * Co + co) * K + k];
  auto row = [&](int64_t u) {
    double* yrow = y + u * Co;
    for (int64_t co = 0; co < Co; ++co) yrow[co] = 0.0;
    for (int64_t k = 0; k < K; ++k) {
      const int64_t num = u - k;
      if (num < 0 || num % stride != 0) continue;
      const int64_t t = num / stride;
      if (t >= T) continue;
      const double* xrow = x + t * Ci;
      const double* wk = wt.data() + k * Co * Ci;
      for (int64_t co = 0; co < Co; ++co)
        yrow[co] += DotN(xrow, wk + co * Ci, Ci);
    }
  };
  AVTSE_ROW_LOOP(To, row);
}

void ConvT1dBackwardInput(const double* dy, int64_t To, int64_t Co,
                          const double* w, int64_t Ci, int64_t K,
                          int64_t stride, double* dx, int64_t T) {
  if (Co == 1) {
    // dx[t,ci] += dot over k of the contiguous dy window and weight row.
    auto row = [&](int64_t t) {
      double* dxrow = dx + t * Ci;
      const int64_t base = t * stride;
      const int64_t kmax = std::min<int64_t>(K, To - base);
      if (kmax <= 0) return;
      for (int64_t ci = 0; ci < Ci; ++ci)
        dxrow[ci] += DotN(dy + base, w + ci * K, kmax);
    };
    AVTSE_ROW_LOOP(T, row);
    return;
  }
  std::vector<double> wt(static_cast<size_t>(K * Ci * Co));  // [k][ci][co]
  for (int64_t ci = 0; ci < Ci; ++ci)
    for (int64_t co = 0; co < Co; ++co)
      for (int64_t k = 0; k < K; ++k)
        wt[static_cast<size_t>((k * Ci + ci) * Co + co)] =
            w[(ci * Co + co) * K + k];
  auto row = [&](int64_t t) {
    double* dxrow = dx + t * Ci;
    for (int64_t k = 0; k < K; ++k) {
      const int64_t u = t * stride + k;
      if (u >= To) continue;
      const double* dyrow = dy + u * Co;
      const double* wk = wt.data() + k * Ci * Co;
      for (int64_t ci = 0; ci < Ci; ++ci)
        dxrow[ci] += DotN(dyrow, wk + ci * Co, Co);
    }
  };
  AVTSE_ROW_LOOP(T, row);
}

void ConvT1dBackwardWeight(const double* x, int64_t T, int64_t Ci,
                           const double* dy, int64_t To, int64_t Co, int64_t K,
                           int64_t stride, double* dw) {
  auto channel = [&](int64_t ci) {
    std::vector<double> local(static_cast<size_t>(K * Co), 0.0);  // [k][co]
    for (int64_t t = 0; t < T; ++t) {
      const double xv = x[t * Ci + ci];
      if (xv == 0.0) continue;
      const int64_t base = t * stride;
      const int64_t kmax = std::min<int64_t>(K, To - base);
      if (Co == 1) {
        AxpyN(local.data(), dy + base, xv, kmax);
      } else {
        for (int64_t k = 0; k < kmax; ++k)
          AxpyN(local.data() + k * Co, dy + (base + k) * Co, xv, Co);
      }
    }
    for (int64_t co = 0; co < Co; ++co)
      for (int64_t k = 0; k < K; ++k)
        dw[(ci * Co + co) * K + k] += local[static_cast<size_t>(k * Co + co)];
  };
  AVTSE_ROW_LOOP(Ci, channel);
}

// ---------------------------------------------------------------------------
// Depthwise Conv1d (stride 1)
// ---------------------------------------------------------------------------

void DwConv1dForward(const double* x, int64_t T, int64_t C, const double* w,
                     int64_t K, const double* bias, int64_t dil, int64_t pad,
                     double* y, int64_t To) {
  std::vector<double> wt(static_cast<size_t>(K * C));  // [k][c]
  for (int64_t c = 0; c < C; ++c)
    for (int64_t k = 0; k < K; ++k)
      wt[static_cast<size_t>(k * C + c)] = w[c * K + k];
  auto row = [&](int64_t t) {
    double* yrow = y + t * C;
    for (int64_t c = 0; c < C; ++c) yrow[c] = bias ? bias[c] : 0.0;
    for (int64_t k = 0; k < K; ++k) {
      const int64_t u = t + k * dil - pad;
      if (u < 0 || u >= T) continue;
      const double* xrow = x + u * C;
      const double* wk = wt.data() + k * C;
      for (int64_t c = 0; c < C; ++c) yrow[c] += xrow[c] * wk[c];
    }
  };
  AVTSE_ROW_LOOP(To, row);
}

void DwConv1dBackwardInput(const double* dy, int64_t To, const double* w,
                           int64_t C, int64_t K, int64_t dil, int64_t pad,
                           double* dx, int64_t T) {
  std::vector<double> wt(static_cast<size_t>(K * C));
  for (int64_t c = 0; c < C; ++c)
    for (int64_t k = 0; k < K; ++k)
      wt[static_cast<size_t>(k * C + c)] = w[c * K + k];
  auto row = [&](int64_t u) {
    double* dxrow = dx + u * C;
    for (int64_t k = 0; k < K; ++k) {
      const int64_t t = u - k * dil + pad;
      if (t < 0 || t >= To) continue;
      const double* dyrow = dy + t * C;
      const double* wk = wt.data() + k * C;
      for (int64_t c = 0; c < C; ++c) dxrow[c] += dyrow[c] * wk[c];
    }
  };
  AVTSE_ROW_LOOP(T, row);
}

void DwConv1dBackwardWeight(const double* x, int64_t T, int64_t C,
                            const double* dy, int64_t To, int64_t K,
                            int64_t dil, int64_t pad, double* dw, double* db) {
  auto channel = [&](int64_t c) {
    double dbias = 0.0;
    for (int64_t t = 0; t < To; ++t) {
      const double g = dy[t * C + c];
      dbias += g;
      if (g == 0.0) continue;
      for (int64_t k = 0; k < K; ++k) {
        const int64_t u = t + k * dil - pad;
        if (u < 0 || u >= T) continue;
        dw[c * K + k] += g * x[u * C + c];
      }
    }
    if (db) db[c] += dbias;
  };
  AVTSE_ROW_LOOP(C, channel);
}

// ---------------------------------------------------------------------------
// MatMul
// ---------------------------------------------------------------------------

static inline void MatMulRow(const double* A, const double* B, double* C,
                             int64_t m, int64_t k, int64_t n, bool trans_a,
                             bool trans_b, bool accumulate, int64_t i) {
  double* crow = C + i * n;
  if (!accumulate)
    for (int64_t j = 0; j < n; ++j) crow[j] = 0.0;
  if (!trans_a && !trans_b) {
    const double* arow = A + i * k;
    for (int64_t l = 0; l < k; ++l) {
      const double a = arow[l];
      if (a == 0.0) continue;
      AxpyN(crow, B + l * n, a, n);
    }
  } else if (!trans_a && trans_b) {
    const double* arow = A + i * k;
    for (int64_t j = 0; j < n; ++j) crow[j] += DotN(arow, B + j * k, k);
  } else if (trans_a && !trans_b) {
    for (int64_t l = 0; l < k; ++l) {
      const double a = A[l * m + i];
      if (a == 0.0) continue;
      AxpyN(crow, B + l * n, a, n);
    }
  } else {
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t l = 0; l < k; ++l) acc += A[l * m + i] * B[j * k + l];
      crow[j] += acc;
    }
  }
}

void MatMul(const double* A, const double* B, double* C, int64_t m, int64_t k,
            int64_t n, bool trans_a, bool trans_b, bool accumulate) {
  if (g_parallel && m > 1) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i)
      MatMulRow(A, B, C, m, k, n, trans_a, trans_b, accumulate, i);
  } else {
    for (int64_t i = 0; i < m; ++i)
      MatMulRow(A, B, C, m, k, n, trans_a, trans_b, accumulate, i);
  }
}

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

namespace {

inline void SoftmaxInPlace(double* s, int64_t T) {
  double mx = s[0];
  for (int64_t j = 1; j < T; ++j) mx = std::max(mx, s[j]);
  double z = 0.0;
  for (int64_t j = 0; j < T; ++j) {
    s[j] = std::exp(s[j] - mx);
    z += s[j];
  }
  const double inv = 1.0 / z;
  for (int64_t j = 0; j < T; ++j) s[j] *= inv;
}

// One query row across all heads: the owning thread writes the whole output
// row, so parallelizing over queries shares no cache lines between threads.
inline void AttentionForwardQuery(const double* q, const double* k,
                                  const double* v, int64_t T, int64_t d,
                                  int64_t dh, int64_t nh, double scale,
                                  double* out, double* p, int64_t i) {
  double* orow = out + i * d;
  for (int64_t l = 0; l < d; ++l) orow[l] = 0.0;
  for (int64_t h = 0; h < nh; ++h) {
    const int64_t off = h * dh;
    const double* qi = q + i * d + off;
    for (int64_t j = 0; j < T; ++j)
      p[j] = DotN(qi, k + j * d + off, dh) * scale;
    SoftmaxInPlace(p, T);
    for (int64_t j = 0; j < T; ++j) AxpyN(orow + off, v + j * d + off, p[j], dh);
  }
}

// Per-head backward into dense head-private scratch; the caller scatters the
// packed results into the strided gradients afterwards.
void AttentionBackwardHead(const double* q, const double* k, const double* v,
                           const double* dout, int64_t T, int64_t d, int64_t dh,
                           int64_t off, double scale, double* dqh, double* dkh,
                           double* dvh) {
  std::vector<double> p(static_cast<size_t>(T)), dp(static_cast<size_t>(T));
  for (int64_t i = 0; i < T; ++i) {
    const double* qi = q + i * d + off;
    const double* doi = dout + i * d + off;
    for (int64_t j = 0; j < T; ++j)
      p[j] = DotN(qi, k + j * d + off, dh) * scale;
    SoftmaxInPlace(p.data(), T);
    for (int64_t j = 0; j < T; ++j) {
      const double pj = p[j];
      AxpyN(dvh + j * dh, doi, pj, dh);
      dp[j] = DotN(doi, v + j * d + off, dh);
    }
    double dot = 0.0;
    for (int64_t j = 0; j < T; ++j) dot += dp[j] * p[j];
    double* dqi = dqh + i * dh;
    for (int64_t j = 0; j < T; ++j) {
      const double ds = p[j] * (dp[j] - dot) * scale;
      if (ds == 0.0) continue;
      AxpyN(dqi, k + j * d + off, ds, dh);
      AxpyN(dkh + j * dh, qi, ds, dh);
    }
  }
}

}  // namespace

void AttentionForward(const double* q, const double* k, const double* v,
                      int64_t T, int64_t d, int64_t nh, double* out) {
  const int64_t dh = d / nh;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  if (g_parallel) {
#pragma omp parallel
    {
      std::vector<double> p(static_cast<size_t>(T));
#pragma omp for schedule(static)
      for (int64_t i = 0; i < T; ++i)
        AttentionForwardQuery(q, k, v, T, d, dh, nh, scale, out, p.data(), i);
    }
  } else {
    std::vector<double> p(static_cast<size_t>(T));
    for (int64_t i = 0; i < T; ++i)
      AttentionForwardQuery(q, k, v, T, d, dh, nh, scale, out, p.data(), i);
  }
}

void AttentionBackward(const double* q, const double* k, const double* v,
                       const double* dout, int64_t T, int64_t d, int64_t nh,
                       double* dq, double* dk, double* dv) {
  const int64_t dh = d / nh;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> scratch(static_cast<size_t>(3 * nh * T * dh), 0.0);
  auto head = [&](int64_t h) {
    double* base = scratch.data() + 3 * h * T * dh;
    AttentionBackwardHead(q, k, v, dout, T, d, dh, h * dh, scale, base,
                          base + T * dh, base + 2 * T * dh);
  };
  if (g_parallel && nh > 1) {
#pragma omp parallel for schedule(static)
    for (int64_t h = 0; h < nh; ++h) head(h);
  } else {
    for (int64_t h = 0; h < nh; ++h) head(h);
  }
  // Scatter packed per-head results; parallel over rows (disjoint writes).
  auto scatter = [&](int64_t i) {
    for (int64_t h = 0; h < nh; ++h) {
      const double* base = scratch.data() + 3 * h * T * dh;
      const int64_t off = h * dh;
      for (int64_t l = 0; l < dh; ++l) {
        dq[i * d + off + l] += base[i * dh + l];
        dk[i * d + off + l] += base[(T + i) * dh + l];
        dv[i * d + off + l] += base[(2 * T + i) * dh + l];
      }
    }
  };
  AVTSE_ROW_LOOP(T, scatter);
}

}  // namespace kernels
}  // namespace avtse

// include/avtse/kernels.h

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

#ifndef AVTSE_KERNELS_H_
#define AVTSE_KERNELS_H_

#include <cstdint>

// Hot inner loops of the network, in two variants each: a serial reference
// and an OpenMP-parallel version. Both produce bitwise-identical results:
// the parallel versions only split independent outputs across threads and
// never reorder a reduction. The active variant is chosen at runtime via
// SetParallel(); tests compare the two, the bench target times them.
//
// Feature matrices are row-major [frames x channels]. Conv weights are
// [out_ch x in_ch x kernel]; depthwise weights are [channels x kernel].

namespace avtse {
namespace kernels {

bool ParallelEnabled();
void SetParallel(bool enabled);
int NumThreads();
void SetNumThreads(int n);

// y[t,co] = b[co] + sum_{ci,k} x[t*stride + k*dil - pad, ci] * w[co,ci,k]
// x is [T x Ci], y is [To x Co]; samples outside [0,T) read as zero.
void Conv1dForward(const double* x, int64_t T, int64_t Ci, const double* w,
                   int64_t Co, int64_t K, const double* bias, int64_t stride,
                   int64_t dil, int64_t pad, double* y, int64_t To);

// dx[u,ci] += sum over (t,k) with t*stride + k*dil - pad == u of dy[t,co]*w[co,ci,k]
void Conv1dBackwardInput(const double* dy, int64_t To, int64_t Co,
                         const double* w, int64_t Ci, int64_t K, int64_t stride,
                         int64_t dil, int64_t pad, double* dx, int64_t T);

// dw[co,ci,k] += sum_t dy[t,co] * x[t*stride + k*dil - pad, ci];  db[co] += sum_t dy[t,co]
void Conv1dBackwardWeight(const double* x, int64_t T, int64_t Ci,
                          const double* dy, int64_t To, int64_t Co, int64_t K,
                          int64_t stride, int64_t dil, int64_t pad, double* dw,
                          double* db);

// Transposed convolution (overlap-add synthesis).
// x is [T x Ci], w is [Ci x Co x K], y is [(T-1)*stride + K, Co]:
//   y[u,co] = sum over (t,k) with t*stride + k == u of x[t,ci] * w[ci,co,k]
void ConvT1dForward(const double* x, int64_t T, int64_t Ci, const double* w,
                    int64_t Co, int64_t K, int64_t stride, double* y,
                    int64_t To);

// dx[t,ci] += sum_{k,co} dy[t*stride + k, co] * w[ci,co,k]
void ConvT1dBackwardInput(const double* dy, int64_t To, int64_t Co,
                          const double* w, int64_t Ci, int64_t K,
                          int64_t stride, double* dx, int64_t T);

// dw[ci,co,k] += sum_t x[t,ci] * dy[t*stride + k, co]
void ConvT1dBackwardWeight(const double* x, int64_t T, int64_t Ci,
                           const double* dy, int64_t To, int64_t Co, int64_t K,
                           int64_t stride, double* dw);

// Depthwise (per-channel) convolution, stride 1.
// y[t,c] = b[c] + sum_k x[t + k*dil - pad, c] * w[c,k]
void DwConv1dForward(const double* x, int64_t T, int64_t C, const double* w,
                     int64_t K, const double* bias, int64_t dil, int64_t pad,
                     double* y, int64_t To);
void DwConv1dBackwardInput(const double* dy, int64_t To, const double* w,
                           int64_t C, int64_t K, int64_t dil, int64_t pad,
                           double* dx, int64_t T);
void DwConv1dBackwardWeight(const double* x, int64_t T, int64_t C,
                            const double* dy, int64_t To, int64_t K,
                            int64_t dil, int64_t pad, double* dw, double* db);

// C = op(A) * op(B) (+= if accumulate). A is [m x k] after transposition,
// B is [k x n] after transposition. trans_a/trans_b give the stored layouts.
void MatMul(const double* A, const double* B, double* C, int64_t m, int64_t k,
            int64_t n, bool trans_a, bool trans_b, bool accumulate);

// Multi-head scaled-dot-product attention over one sequence.
// q,k,v,out are [T x d]; head h occupies columns [h*dh, (h+1)*dh), dh = d/nh.
// out[i] = sum_j softmax_j(q_i . k_j / sqrt(dh)) v_j, per head.
// Nothing is materialized besides out: backward recomputes the softmax rows,
// so memory stays O(T x d) even for long sequences.
void AttentionForward(const double* q, const double* k, const double* v,
                      int64_t T, int64_t d, int64_t nh, double* out);
void AttentionBackward(const double* q, const double* k, const double* v,
                       const double* dout, int64_t T, int64_t d, int64_t nh,
                       double* dq, double* dk, double* dv);

}  // namespace kernels
}  // namespace avtse

#endif  // AVTSE_KERNELS_H_

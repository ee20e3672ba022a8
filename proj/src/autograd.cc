// src/autograd.cc

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

#include "avtse/autograd.h"

#include <cmath>
#include <stdexcept>

#include "avtse/kernels.h"

namespace avtse {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLn10 = 2.30258509299404568402;

void CheckSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.SameShape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.ShapeString() + " vs " + b.ShapeString());
}

void CheckScalar(const Tensor& t, const char* op) {
  if (t.NumEl() != 1)
    throw std::invalid_argument(std::string(op) + ": expected scalar, got " +
                                t.ShapeString());
}

void CheckRank2(const Tensor& t, const char* op) {
  if (t.Rank() != 2)
    throw std::invalid_argument(std::string(op) + ": expected rank-2, got " +
                                t.ShapeString());
}

}  // namespace

Value Graph::Emit(Tensor out, bool needs_grad, BackwardFn backward) {
  Node n;
  n.out = std::move(out);
  n.needs_grad = needs_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Value{static_cast<int32_t>(nodes_.size() - 1)};
}

Tensor& Graph::GradRef(Value v) {
  Node& n = nodes_[static_cast<size_t>(v.id)];
  if (!n.has_grad) {
    n.grad = Tensor(n.out.Shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::Accum(Value v, const Tensor& g) {
  if (!NeedsGrad(v)) return;
  Tensor& dst = GradRef(v);
  const int64_t n = dst.NumEl();
  for (int64_t i = 0; i < n; ++i) dst[i] += g[i];
}

Value Graph::Input(Tensor t) { return Emit(std::move(t), false, nullptr); }

Value Graph::Param(Parameter* p) {
  auto it = param_ids_.find(p);
  if (it != param_ids_.end()) return Value{it->second};
  Value v = Emit(p->value, true, [p](Graph&, const Tensor& g) {
    for (int64_t i = 0; i < g.NumEl(); ++i) p->grad[i] += g[i];
  });
  param_ids_[p] = v.id;
  return v;
}

void Graph::Backward(Value loss) {
  CheckScalar(Data(loss), "Backward");
  GradRef(loss)[0] = 1.0;
  for (int32_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.needs_grad && n.has_grad && n.backward) n.backward(*this, n.grad);
  }
}

// ---------------------------------------------------------------------------
// Elementwise / shape ops
// ---------------------------------------------------------------------------

Value Graph::Add(Value a, Value b) {
  const Tensor& ta = Data(a);
  const Tensor& tb = Data(b);
  CheckSameShape(ta, tb, "Add");
  Tensor out(ta.Shape());
  for (int64_t i = 0; i < ta.NumEl(); ++i) out[i] = ta[i] + tb[i];
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b](Graph& g, const Tensor& gr) {
                g.Accum(a, gr);
                g.Accum(b, gr);
              });
}

Value Graph::Sub(Value a, Value b) {
  const Tensor& ta = Data(a);
  const Tensor& tb = Data(b);
  CheckSameShape(ta, tb, "Sub");
  Tensor out(ta.Shape());
  for (int64_t i = 0; i < ta.NumEl(); ++i) out[i] = ta[i] - tb[i];
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b](Graph& g, const Tensor& gr) {
                g.Accum(a, gr);
                if (g.NeedsGrad(b)) {
                  Tensor& db = g.GradRef(b);
                  for (int64_t i = 0; i < gr.NumEl(); ++i) db[i] -= gr[i];
                }
              });
}

Value Graph::Mul(Value a, Value b) {
  const Tensor& ta = Data(a);
  const Tensor& tb = Data(b);
  CheckSameShape(ta, tb, "Mul");
  Tensor out(ta.Shape());
  for (int64_t i = 0; i < ta.NumEl(); ++i) out[i] = ta[i] * tb[i];
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b](Graph& g, const Tensor& gr) {
                if (g.NeedsGrad(a)) {
                  Tensor& da = g.GradRef(a);
                  const Tensor& tb2 = g.Data(b);
                  for (int64_t i = 0; i < gr.NumEl(); ++i)
                    da[i] += gr[i] * tb2[i];
                }
                if (g.NeedsGrad(b)) {
                  Tensor& db = g.GradRef(b);
                  const Tensor& ta2 = g.Data(a);
                  for (int64_t i = 0; i < gr.NumEl(); ++i)
                    db[i] += gr[i] * ta2[i];
                }
              });
}

Value Graph::Scale(Value a, double c) {
  const Tensor& ta = Data(a);
  Tensor out(ta.Shape());
  for (int64_t i = 0; i < ta.NumEl(); ++i) out[i] = ta[i] * c;
  return Emit(std::move(out), NeedsGrad(a), [a, c](Graph& g, const Tensor& gr) {
    if (!g.NeedsGrad(a)) return;
    Tensor& da = g.GradRef(a);
    for (int64_t i = 0; i < gr.NumEl(); ++i) da[i] += gr[i] * c;
  });
}

Value Graph::AddBias(Value x, Value b) {
  const Tensor& tx = Data(x);
  const Tensor& tb = Data(b);
  CheckRank2(tx, "AddBias");
  const int64_t T = tx.Dim(0), C = tx.Dim(1);
  if (tb.NumEl() != C)
    throw std::invalid_argument("AddBias: bias length mismatch");
  Tensor out(tx.Shape());
  for (int64_t t = 0; t < T; ++t)
    for (int64_t c = 0; c < C; ++c) out[t * C + c] = tx[t * C + c] + tb[c];
  return Emit(std::move(out), NeedsGrad(x) || NeedsGrad(b),
              [x, b, T, C](Graph& g, const Tensor& gr) {
                g.Accum(x, gr);
                if (g.NeedsGrad(b)) {
                  Tensor& db = g.GradRef(b);
                  for (int64_t t = 0; t < T; ++t)
                    for (int64_t c = 0; c < C; ++c) db[c] += gr[t * C + c];
                }
              });
}

Value Graph::Relu(Value x) {
  const Tensor& tx = Data(x);
  Tensor out(tx.Shape());
  for (int64_t i = 0; i < tx.NumEl(); ++i) out[i] = tx[i] > 0.0 ? tx[i] : 0.0;
  return Emit(std::move(out), NeedsGrad(x), [x](Graph& g, const Tensor& gr) {
    if (!g.NeedsGrad(x)) return;
    Tensor& dx = g.GradRef(x);
    const Tensor& tx2 = g.Data(x);
    for (int64_t i = 0; i < gr.NumEl(); ++i)
      if (tx2[i] > 0.0) dx[i] += gr[i];
  });
}

Value Graph::Gelu(Value x) {
  const Tensor& tx = Data(x);
  Tensor out(tx.Shape());
  for (int64_t i = 0; i < tx.NumEl(); ++i) {
    const double v = tx[i];
    out[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
  return Emit(std::move(out), NeedsGrad(x), [x](Graph& g, const Tensor& gr) {
    if (!g.NeedsGrad(x)) return;
    Tensor& dx = g.GradRef(x);
    const Tensor& tx2 = g.Data(x);
    for (int64_t i = 0; i < gr.NumEl(); ++i) {
      const double v = tx2[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      dx[i] += gr[i] * (cdf + v * pdf);
    }
  });
}

Value Graph::ConcatCols(Value a, Value b) {
  const Tensor& ta = Data(a);
  const Tensor& tb = Data(b);
  CheckRank2(ta, "ConcatCols");
  CheckRank2(tb, "ConcatCols");
  if (ta.Dim(0) != tb.Dim(0))
    throw std::invalid_argument("ConcatCols: row count mismatch " +
                                ta.ShapeString() + " vs " + tb.ShapeString());
  const int64_t T = ta.Dim(0), Ca = ta.Dim(1), Cb = tb.Dim(1);
  Tensor out({T, Ca + Cb});
  for (int64_t t = 0; t < T; ++t) {
    for (int64_t c = 0; c < Ca; ++c) out[t * (Ca + Cb) + c] = ta[t * Ca + c];
    for (int64_t c = 0; c < Cb; ++c)
      out[t * (Ca + Cb) + Ca + c] = tb[t * Cb + c];
  }
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b, T, Ca, Cb](Graph& g, const Tensor& gr) {
                if (g.NeedsGrad(a)) {
                  Tensor& da = g.GradRef(a);
                  for (int64_t t = 0; t < T; ++t)
                    for (int64_t c = 0; c < Ca; ++c)
                      da[t * Ca + c] += gr[t * (Ca + Cb) + c];
                }
                if (g.NeedsGrad(b)) {
                  Tensor& db = g.GradRef(b);
                  for (int64_t t = 0; t < T; ++t)
                    for (int64_t c = 0; c < Cb; ++c)
                      db[t * Cb + c] += gr[t * (Ca + Cb) + Ca + c];
                }
              });
}

Value Graph::SliceRows(Value x, int64_t start, int64_t len) {
  const Tensor& tx = Data(x);
  CheckRank2(tx, "SliceRows");
  const int64_t T = tx.Dim(0), C = tx.Dim(1);
  if (start < 0 || len < 0 || start + len > T)
    throw std::invalid_argument("SliceRows: range out of bounds");
  Tensor out({len, C});
  for (int64_t t = 0; t < len; ++t)
    for (int64_t c = 0; c < C; ++c) out[t * C + c] = tx[(start + t) * C + c];
  return Emit(std::move(out), NeedsGrad(x),
              [x, start, len, C](Graph& g, const Tensor& gr) {
                if (!g.NeedsGrad(x)) return;
                Tensor& dx = g.GradRef(x);
                for (int64_t t = 0; t < len; ++t)
                  for (int64_t c = 0; c < C; ++c)
                    dx[(start + t) * C + c] += gr[t * C + c];
              });
}

Value Graph::EdgePadRows(Value x, int64_t extra) {
  const Tensor& tx = Data(x);
  CheckRank2(tx, "EdgePadRows");
  const int64_t T = tx.Dim(0), C = tx.Dim(1);
  if (T == 0) throw std::invalid_argument("EdgePadRows: empty input");
  if (extra < 0) throw std::invalid_argument("EdgePadRows: negative pad");
  Tensor out({T + extra, C});
  for (int64_t t = 0; t < T; ++t)
    for (int64_t c = 0; c < C; ++c) out[t * C + c] = tx[t * C + c];
  for (int64_t t = T; t < T + extra; ++t)
    for (int64_t c = 0; c < C; ++c) out[t * C + c] = tx[(T - 1) * C + c];
  return Emit(std::move(out), NeedsGrad(x),
              [x, T, extra, C](Graph& g, const Tensor& gr) {
                if (!g.NeedsGrad(x)) return;
                Tensor& dx = g.GradRef(x);
                for (int64_t t = 0; t < T; ++t)
                  for (int64_t c = 0; c < C; ++c) dx[t * C + c] += gr[t * C + c];
                for (int64_t t = T; t < T + extra; ++t)
                  for (int64_t c = 0; c < C; ++c)
                    dx[(T - 1) * C + c] += gr[t * C + c];
              });
}

Value Graph::RepeatRows(Value x, int64_t factor) {
  const Tensor& tx = Data(x);
  CheckRank2(tx, "RepeatRows");
  if (factor < 1) throw std::invalid_argument("RepeatRows: factor < 1");
  const int64_t T = tx.Dim(0), C = tx.Dim(1);
  Tensor out({T * factor, C});
  for (int64_t t = 0; t < T; ++t)
    for (int64_t f = 0; f < factor; ++f)
      for (int64_t c = 0; c < C; ++c)
        out[(t * factor + f) * C + c] = tx[t * C + c];
  return Emit(std::move(out), NeedsGrad(x),
              [x, factor, T, C](Graph& g, const Tensor& gr) {
                if (!g.NeedsGrad(x)) return;
                Tensor& dx = g.GradRef(x);
                for (int64_t t = 0; t < T; ++t)
                  for (int64_t f = 0; f < factor; ++f)
                    for (int64_t c = 0; c < C; ++c)
                      dx[t * C + c] += gr[(t * factor + f) * C + c];
              });
}

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

Value Graph::Conv1d(Value x, Value w, Value b, int64_t stride, int64_t dil,
                    int64_t pad) {
  const Tensor& tx = Data(x);
  const Tensor& tw = Data(w);
  CheckRank2(tx, "Conv1d");
  if (tw.Rank() != 3) throw std::invalid_argument("Conv1d: weight not rank-3");
  const int64_t T = tx.Dim(0), Ci = tx.Dim(1);
  const int64_t Co = tw.Dim(0), K = tw.Dim(2);
  if (tw.Dim(1) != Ci)
    throw std::invalid_argument("Conv1d: channel mismatch, input " +
                                tx.ShapeString() + " weight " +
                                tw.ShapeString());
  const int64_t span = (K - 1) * dil + 1;
  const int64_t To = (T + 2 * pad - span) / stride + 1;
  if (T + 2 * pad < span)
    throw std::invalid_argument("Conv1d: input shorter than kernel span");
  const double* bias = b.Valid() ? Data(b).Data() : nullptr;
  if (b.Valid() && Data(b).NumEl() != Co)
    throw std::invalid_argument("Conv1d: bias length mismatch");
  Tensor out({To, Co});
  kernels::Conv1dForward(tx.Data(), T, Ci, tw.Data(), Co, K, bias, stride, dil,
                         pad, out.Data(), To);
  bool ng = NeedsGrad(x) || NeedsGrad(w) || (b.Valid() && NeedsGrad(b));
  return Emit(std::move(out), ng,
              [x, w, b, stride, dil, pad, T, Ci, Co, K,
               To](Graph& g, const Tensor& gr) {
                const Tensor& tx2 = g.Data(x);
                const Tensor& tw2 = g.Data(w);
                if (g.NeedsGrad(x))
                  kernels::Conv1dBackwardInput(gr.Data(), To, Co, tw2.Data(),
                                               Ci, K, stride, dil, pad,
                                               g.GradRef(x).Data(), T);
                if (g.NeedsGrad(w) || (b.Valid() && g.NeedsGrad(b))) {
                  double* db =
                      b.Valid() && g.NeedsGrad(b) ? g.GradRef(b).Data() : nullptr;
                  // Weight grads are cheap next to input grads; always both.
                  kernels::Conv1dBackwardWeight(tx2.Data(), T, Ci, gr.Data(),
                                                To, Co, K, stride, dil, pad,
                                                g.GradRef(w).Data(), db);
                }
              });
}

Value Graph::ConvT1d(Value x, Value w, int64_t stride) {
  const Tensor& tx = Data(x);
  const Tensor& tw = Data(w);
  CheckRank2(tx, "ConvT1d");
  if (tw.Rank() != 3) throw std::invalid_argument("ConvT1d: weight not rank-3");
  const int64_t T = tx.Dim(0), Ci = tx.Dim(1);
  const int64_t Co = tw.Dim(1), K = tw.Dim(2);
  if (tw.Dim(0) != Ci)
    throw std::invalid_argument("ConvT1d: channel mismatch, input " +
                                tx.ShapeString() + " weight " +
                                tw.ShapeString());
  if (T < 1) throw std::invalid_argument("ConvT1d: empty input");
  const int64_t To = (T - 1) * stride + K;
  Tensor out({To, Co});
  kernels::ConvT1dForward(tx.Data(), T, Ci, tw.Data(), Co, K, stride,
                          out.Data(), To);
  bool ng = NeedsGrad(x) || NeedsGrad(w);
  return Emit(std::move(out), ng,
              [x, w, stride, T, Ci, Co, K, To](Graph& g, const Tensor& gr) {
                const Tensor& tx2 = g.Data(x);
                const Tensor& tw2 = g.Data(w);
                if (g.NeedsGrad(x))
                  kernels::ConvT1dBackwardInput(gr.Data(), To, Co, tw2.Data(),
                                                Ci, K, stride,
                                                g.GradRef(x).Data(), T);
                if (g.NeedsGrad(w))
                  kernels::ConvT1dBackwardWeight(tx2.Data(), T, Ci, gr.Data(),
                                                 To, Co, K, stride,
                                                 g.GradRef(w).Data());
              });
}

Value Graph::DwConv1d(Value x, Value w, Value b, int64_t dil, int64_t pad) {
  const Tensor& tx = Data(x);
  const Tensor& tw = Data(w);
  CheckRank2(tx, "DwConv1d");
  CheckRank2(tw, "DwConv1d");
  const int64_t T = tx.Dim(0), C = tx.Dim(1), K = tw.Dim(1);
  if (tw.Dim(0) != C)
    throw std::invalid_argument("DwConv1d: channel mismatch");
  const int64_t span = (K - 1) * dil + 1;
  const int64_t To = T + 2 * pad - span + 1;
  if (To < 1) throw std::invalid_argument("DwConv1d: input too short");
  const double* bias = b.Valid() ? Data(b).Data() : nullptr;
  Tensor out({To, C});
  kernels::DwConv1dForward(tx.Data(), T, C, tw.Data(), K, bias, dil, pad,
                           out.Data(), To);
  bool ng = NeedsGrad(x) || NeedsGrad(w) || (b.Valid() && NeedsGrad(b));
  return Emit(std::move(out), ng,
              [x, w, b, dil, pad, T, C, K, To](Graph& g, const Tensor& gr) {
                const Tensor& tx2 = g.Data(x);
                const Tensor& tw2 = g.Data(w);
                if (g.NeedsGrad(x))
                  kernels::DwConv1dBackwardInput(gr.Data(), To, tw2.Data(), C,
                                                 K, dil, pad,
                                                 g.GradRef(x).Data(), T);
                if (g.NeedsGrad(w) || (b.Valid() && g.NeedsGrad(b))) {
                  double* db =
                      b.Valid() && g.NeedsGrad(b) ? g.GradRef(b).Data() : nullptr;
                  kernels::DwConv1dBackwardWeight(tx2.Data(), T, C, gr.Data(),
                                                  To, K, dil, pad,
                                                  g.GradRef(w).Data(), db);
                }
              });
}

Value Graph::Linear(Value x, Value w, Value b) {
  const Tensor& tx = Data(x);
  const Tensor& tw = Data(w);
  CheckRank2(tx, "Linear");
  CheckRank2(tw, "Linear");
  const int64_t T = tx.Dim(0), Ci = tx.Dim(1);
  const int64_t Co = tw.Dim(0);
  if (tw.Dim(1) != Ci)
    throw std::invalid_argument("Linear: dim mismatch, input " +
                                tx.ShapeString() + " weight " +
                                tw.ShapeString());
  Tensor out({T, Co});
  kernels::MatMul(tx.Data(), tw.Data(), out.Data(), T, Ci, Co, false, true,
                  false);
  if (b.Valid()) {
    const Tensor& tb = Data(b);
    if (tb.NumEl() != Co)
      throw std::invalid_argument("Linear: bias length mismatch");
    for (int64_t t = 0; t < T; ++t)
      for (int64_t c = 0; c < Co; ++c) out[t * Co + c] += tb[c];
  }
  bool ng = NeedsGrad(x) || NeedsGrad(w) || (b.Valid() && NeedsGrad(b));
  return Emit(std::move(out), ng,
              [x, w, b, T, Ci, Co](Graph& g, const Tensor& gr) {
                const Tensor& tx2 = g.Data(x);
                const Tensor& tw2 = g.Data(w);
                if (g.NeedsGrad(x))
                  kernels::MatMul(gr.Data(), tw2.Data(), g.GradRef(x).Data(),
                                  T, Co, Ci, false, false, true);
                if (g.NeedsGrad(w))
                  kernels::MatMul(gr.Data(), tx2.Data(), g.GradRef(w).Data(),
                                  Co, T, Ci, true, false, true);
                if (b.Valid() && g.NeedsGrad(b)) {
                  Tensor& db = g.GradRef(b);
                  for (int64_t t = 0; t < T; ++t)
                    for (int64_t c = 0; c < Co; ++c) db[c] += gr[t * Co + c];
                }
              });
}

Value Graph::LayerNorm(Value x, Value gamma, Value beta, double eps) {
  const Tensor& tx = Data(x);
  const Tensor& tg = Data(gamma);
  const Tensor& tb = Data(beta);
  CheckRank2(tx, "LayerNorm");
  const int64_t T = tx.Dim(0), C = tx.Dim(1);
  if (tg.NumEl() != C || tb.NumEl() != C)
    throw std::invalid_argument("LayerNorm: affine length mismatch");
  Tensor out({T, C});
  for (int64_t t = 0; t < T; ++t) {
    const double* row = tx.Data() + t * C;
    double mean = 0.0;
    for (int64_t c = 0; c < C; ++c) mean += row[c];
    mean /= static_cast<double>(C);
    double var = 0.0;
    for (int64_t c = 0; c < C; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(C);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int64_t c = 0; c < C; ++c)
      out[t * C + c] = tg[c] * (row[c] - mean) * inv + tb[c];
  }
  bool ng = NeedsGrad(x) || NeedsGrad(gamma) || NeedsGrad(beta);
  return Emit(std::move(out), ng,
              [x, gamma, beta, eps, T, C](Graph& g, const Tensor& gr) {
                const Tensor& tx2 = g.Data(x);
                const Tensor& tg2 = g.Data(gamma);
                const bool need_x = g.NeedsGrad(x);
                const bool need_g = g.NeedsGrad(gamma);
                const bool need_b = g.NeedsGrad(beta);
                Tensor* dx = need_x ? &g.GradRef(x) : nullptr;
                Tensor* dg = need_g ? &g.GradRef(gamma) : nullptr;
                Tensor* db = need_b ? &g.GradRef(beta) : nullptr;
                std::vector<double> xhat(static_cast<size_t>(C));
                for (int64_t t = 0; t < T; ++t) {
                  const double* row = tx2.Data() + t * C;
                  const double* grow = gr.Data() + t * C;
                  double mean = 0.0;
                  for (int64_t c = 0; c < C; ++c) mean += row[c];
                  mean /= static_cast<double>(C);
                  double var = 0.0;
                  for (int64_t c = 0; c < C; ++c)
                    var += (row[c] - mean) * (row[c] - mean);
                  var /= static_cast<double>(C);
                  const double inv = 1.0 / std::sqrt(var + eps);
                  for (int64_t c = 0; c < C; ++c)
                    xhat[static_cast<size_t>(c)] = (row[c] - mean) * inv;
                  if (need_g || need_b) {
                    for (int64_t c = 0; c < C; ++c) {
                      if (dg) (*dg)[c] += grow[c] * xhat[static_cast<size_t>(c)];
                      if (db) (*db)[c] += grow[c];
                    }
                  }
                  if (need_x) {
                    double m1 = 0.0, m2 = 0.0;
                    for (int64_t c = 0; c < C; ++c) {
                      const double gg = grow[c] * tg2[c];
                      m1 += gg;
                      m2 += gg * xhat[static_cast<size_t>(c)];
                    }
                    m1 /= static_cast<double>(C);
                    m2 /= static_cast<double>(C);
                    double* dxrow = dx->Data() + t * C;
                    for (int64_t c = 0; c < C; ++c) {
                      const double gg = grow[c] * tg2[c];
                      dxrow[c] +=
                          (gg - m1 - xhat[static_cast<size_t>(c)] * m2) * inv;
                    }
                  }
                }
              });
}

Value Graph::Attention(Value q, Value k, Value v, int64_t num_heads) {
  const Tensor& tq = Data(q);
  const Tensor& tk = Data(k);
  const Tensor& tv = Data(v);
  CheckRank2(tq, "Attention");
  CheckSameShape(tq, tk, "Attention(q,k)");
  CheckSameShape(tq, tv, "Attention(q,v)");
  const int64_t T = tq.Dim(0), d = tq.Dim(1);
  if (num_heads < 1 || d % num_heads != 0)
    throw std::invalid_argument("Attention: heads must divide width");
  Tensor out({T, d});
  kernels::AttentionForward(tq.Data(), tk.Data(), tv.Data(), T, d, num_heads,
                            out.Data());
  bool ng = NeedsGrad(q) || NeedsGrad(k) || NeedsGrad(v);
  return Emit(std::move(out), ng,
              [q, k, v, num_heads, T, d](Graph& g, const Tensor& gr) {
                // Scratch buffers for any operand that is constant.
                Tensor scratch;
                auto grad_or_scratch = [&](Value val) -> double* {
                  if (g.NeedsGrad(val)) return g.GradRef(val).Data();
                  if (scratch.NumEl() == 0) scratch = Tensor({T, d});
                  return scratch.Data();
                };
                double* dq = grad_or_scratch(q);
                double* dk = grad_or_scratch(k);
                double* dv = grad_or_scratch(v);
                kernels::AttentionBackward(g.Data(q).Data(), g.Data(k).Data(),
                                           g.Data(v).Data(), gr.Data(), T, d,
                                           num_heads, dq, dk, dv);
              });
}

// ---------------------------------------------------------------------------
// Reductions and scalars
// ---------------------------------------------------------------------------

Value Graph::Dot(Value a, Value b) {
  const Tensor& ta = Data(a);
  const Tensor& tb = Data(b);
  if (ta.NumEl() != tb.NumEl())
    throw std::invalid_argument("Dot: element count mismatch");
  double acc = 0.0;
  for (int64_t i = 0; i < ta.NumEl(); ++i) acc += ta[i] * tb[i];
  Tensor out({1});
  out[0] = acc;
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b](Graph& g, const Tensor& gr) {
                const double g0 = gr[0];
                if (g.NeedsGrad(a)) {
                  Tensor& da = g.GradRef(a);
                  const Tensor& tb2 = g.Data(b);
                  for (int64_t i = 0; i < da.NumEl(); ++i)
                    da[i] += g0 * tb2[i];
                }
                if (g.NeedsGrad(b)) {
                  Tensor& db = g.GradRef(b);
                  const Tensor& ta2 = g.Data(a);
                  for (int64_t i = 0; i < db.NumEl(); ++i)
                    db[i] += g0 * ta2[i];
                }
              });
}

Value Graph::MulScalar(Value x, Value s) {
  const Tensor& tx = Data(x);
  const Tensor& ts = Data(s);
  CheckScalar(ts, "MulScalar");
  Tensor out(tx.Shape());
  const double sv = ts[0];
  for (int64_t i = 0; i < tx.NumEl(); ++i) out[i] = tx[i] * sv;
  return Emit(std::move(out), NeedsGrad(x) || NeedsGrad(s),
              [x, s](Graph& g, const Tensor& gr) {
                const double sv2 = g.Data(s)[0];
                if (g.NeedsGrad(x)) {
                  Tensor& dx = g.GradRef(x);
                  for (int64_t i = 0; i < gr.NumEl(); ++i)
                    dx[i] += gr[i] * sv2;
                }
                if (g.NeedsGrad(s)) {
                  const Tensor& tx2 = g.Data(x);
                  double acc = 0.0;
                  for (int64_t i = 0; i < gr.NumEl(); ++i)
                    acc += gr[i] * tx2[i];
                  g.GradRef(s)[0] += acc;
                }
              });
}

Value Graph::SAdd(Value a, Value b) {
  CheckScalar(Data(a), "SAdd");
  CheckScalar(Data(b), "SAdd");
  Tensor out({1});
  out[0] = Data(a)[0] + Data(b)[0];
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b](Graph& g, const Tensor& gr) {
                if (g.NeedsGrad(a)) g.GradRef(a)[0] += gr[0];
                if (g.NeedsGrad(b)) g.GradRef(b)[0] += gr[0];
              });
}

Value Graph::SAddConst(Value a, double c) {
  CheckScalar(Data(a), "SAddConst");
  Tensor out({1});
  out[0] = Data(a)[0] + c;
  return Emit(std::move(out), NeedsGrad(a), [a](Graph& g, const Tensor& gr) {
    if (g.NeedsGrad(a)) g.GradRef(a)[0] += gr[0];
  });
}

Value Graph::SMul(Value a, Value b) {
  CheckScalar(Data(a), "SMul");
  CheckScalar(Data(b), "SMul");
  Tensor out({1});
  out[0] = Data(a)[0] * Data(b)[0];
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b](Graph& g, const Tensor& gr) {
                if (g.NeedsGrad(a)) g.GradRef(a)[0] += gr[0] * g.Data(b)[0];
                if (g.NeedsGrad(b)) g.GradRef(b)[0] += gr[0] * g.Data(a)[0];
              });
}

Value Graph::SDiv(Value a, Value b) {
  CheckScalar(Data(a), "SDiv");
  CheckScalar(Data(b), "SDiv");
  Tensor out({1});
  out[0] = Data(a)[0] / Data(b)[0];
  return Emit(std::move(out), NeedsGrad(a) || NeedsGrad(b),
              [a, b](Graph& g, const Tensor& gr) {
                const double bv = g.Data(b)[0];
                if (g.NeedsGrad(a)) g.GradRef(a)[0] += gr[0] / bv;
                if (g.NeedsGrad(b))
                  g.GradRef(b)[0] -= gr[0] * g.Data(a)[0] / (bv * bv);
              });
}

Value Graph::SLog10(Value a) {
  CheckScalar(Data(a), "SLog10");
  Tensor out({1});
  out[0] = std::log10(Data(a)[0]);
  return Emit(std::move(out), NeedsGrad(a), [a](Graph& g, const Tensor& gr) {
    if (g.NeedsGrad(a)) g.GradRef(a)[0] += gr[0] / (g.Data(a)[0] * kLn10);
  });
}

}  // namespace avtse

// src/objectives.cc

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

#include "avtse/objectives.h"

#include <algorithm>
#include <stdexcept>

#include "avtse/model.h"

namespace avtse {

Value SiSdrLossG(Graph& g, Value reference, Value estimate, double eps) {
  const Tensor& ty = g.Data(reference);
  const Tensor& ts = g.Data(estimate);
  if (ty.NumEl() != ts.NumEl())
    throw std::invalid_argument("SiSdrLoss: length mismatch");
  double ypow = 0.0;
  for (int64_t i = 0; i < ty.NumEl(); ++i) ypow += ty[i] * ty[i];
  if (ypow <= 0.0)
    throw std::invalid_argument("SiSdrLoss: zero-power reference");

  Value yy = g.Dot(reference, reference);
  Value sy = g.Dot(estimate, reference);
  Value alpha = g.SDiv(sy, yy);
  Value proj = g.MulScalar(reference, alpha);
  Value err = g.Sub(estimate, proj);
  Value num = g.SAddConst(g.Dot(proj, proj), eps);
  Value den = g.SAddConst(g.Dot(err, err), eps);
  return g.Scale(g.SLog10(g.SDiv(num, den)), -10.0);
}

double SiSdrLoss(const Waveform& reference, const Waveform& estimate) {
  Graph g;
  Value y = g.Input(WaveformToTensor(reference));
  Value s = g.Input(WaveformToTensor(estimate));
  return g.Scalar(SiSdrLossG(g, y, s));
}

namespace {

// Dense {0,1} selector broadcast over channels, trimmed to [T x C].
Tensor SelectorTensor(const std::vector<uint8_t>& bits, int64_t T, int64_t C) {
  Tensor m({T, C});
  for (int64_t t = 0; t < T; ++t) {
    if (!bits[static_cast<size_t>(t)]) continue;
    for (int64_t c = 0; c < C; ++c) m[t * C + c] = 1.0;
  }
  return m;
}

}  // namespace

MaskedMseValues MaskedMseLossesG(Graph& g, Value x_hat, Value y_emb,
                                 const MaskPair& mp) {
  const Tensor& tx = g.Data(x_hat);
  const Tensor& ty = g.Data(y_emb);
  const int64_t T =
      std::min({tx.Dim(0), ty.Dim(0), mp.NumFrames()});
  const int64_t C = tx.Dim(1);
  if (ty.Dim(1) != C)
    throw std::invalid_argument("MaskedMseLosses: channel mismatch");
  Value xh = g.SliceRows(x_hat, 0, T);
  Value ye = g.SliceRows(y_emb, 0, T);
  Value diff = g.Sub(xh, ye);
  const double inv_n = 1.0 / static_cast<double>(T * C);
  Value inv_mask = g.Input(SelectorTensor(mp.masked, T, C));
  Value mask = g.Input(SelectorTensor(mp.unmasked, T, C));
  Value dm = g.Mul(diff, inv_mask);
  Value du = g.Mul(diff, mask);
  MaskedMseValues out;
  out.recover = g.Scale(g.Dot(dm, dm), inv_n);
  out.tse_embedding = g.Scale(g.Dot(du, du), inv_n);
  return out;
}

std::pair<double, double> MaskedMseLosses(const FeatureSequence& x_hat,
                                          const FeatureSequence& y_emb,
                                          const MaskPair& mp) {
  Graph g;
  MaskedMseValues v = MaskedMseLossesG(g, g.Input(x_hat.data),
                                       g.Input(y_emb.data), mp);
  return {g.Scalar(v.recover), g.Scalar(v.tse_embedding)};
}

Value TotalLossG(Graph& g, Value reference, Value estimate, Value x_hat,
                 Value y_emb, const MaskPair& mp, const LossWeights& w) {
  Value total = g.Scale(SiSdrLossG(g, reference, estimate), w.alpha);
  if (w.beta != 0.0 || w.gamma != 0.0) {
    MaskedMseValues mse = MaskedMseLossesG(g, x_hat, y_emb, mp);
    total = g.SAdd(total, g.Scale(mse.recover, w.beta));
    total = g.SAdd(total, g.Scale(mse.tse_embedding, w.gamma));
  }
  return total;
}

double TotalLoss(const Waveform& reference, const Waveform& estimate,
                 const FeatureSequence& x_hat, const FeatureSequence& y_emb,
                 const MaskPair& mp, const LossWeights& w) {
  Graph g;
  Value y = g.Input(WaveformToTensor(reference));
  Value s = g.Input(WaveformToTensor(estimate));
  Value t = TotalLossG(g, y, s, g.Input(x_hat.data), g.Input(y_emb.data), mp, w);
  return g.Scalar(t);
}

}  // namespace avtse

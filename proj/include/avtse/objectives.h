// include/avtse/objectives.h

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

#ifndef AVTSE_OBJECTIVES_H_
#define AVTSE_OBJECTIVES_H_

#include <utility>

#include "avtse/autograd.h"
#include "avtse/masked_region.h"
#include "avtse/signal_io.h"

namespace avtse {

/// Scale factors for the stage-two objective; stage one is the (1, 0, 0)
/// special case.
struct LossWeights {
  double alpha = 1.0;
  double beta = 5.0;
  double gamma = 1.0;
};

/// Negated scale-invariant SDR in dB, epsilon-stabilized:
///   -10 log10((||a y||^2 + eps) / (||s - a y||^2 + eps)),  a = <s,y>/||y||^2
Value SiSdrLossG(Graph& g, Value reference, Value estimate, double eps = 1e-8);
double SiSdrLoss(const Waveform& reference, const Waveform& estimate);

/// Masked/unmasked mean-squared errors between the predicted and reference
/// embeddings. Both means are taken over all frames*channels with zeros in
/// the complementary region, so the two terms sum to the full-tensor MSE.
struct MaskedMseValues {
  Value recover;
  Value tse_embedding;
};
MaskedMseValues MaskedMseLossesG(Graph& g, Value x_hat, Value y_emb,
                                 const MaskPair& mp);
std::pair<double, double> MaskedMseLosses(const FeatureSequence& x_hat,
                                          const FeatureSequence& y_emb,
                                          const MaskPair& mp);

/// alpha * L_siSdr + beta * L_recover + gamma * L_tseEmbedding.
Value TotalLossG(Graph& g, Value reference, Value estimate, Value x_hat,
                 Value y_emb, const MaskPair& mp, const LossWeights& w);
double TotalLoss(const Waveform& reference, const Waveform& estimate,
                 const FeatureSequence& x_hat, const FeatureSequence& y_emb,
                 const MaskPair& mp, const LossWeights& w);

}  // namespace avtse

#endif  // AVTSE_OBJECTIVES_H_

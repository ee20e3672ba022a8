// include/avtse/model.h

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

#ifndef AVTSE_MODEL_H_
#define AVTSE_MODEL_H_

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "avtse/autograd.h"
#include "avtse/masked_region.h"
#include "avtse/model_config.h"
#include "avtse/signal_io.h"

namespace avtse {

/// Nearest-neighbor upsampling of a cue sequence: each frame repeated
/// `factor` consecutive times.
FeatureSequence UpsampleCue(const FeatureSequence& v, int64_t factor);

Tensor WaveformToTensor(const Waveform& w);
Waveform TensorToWaveform(const Tensor& t, int sample_rate);

/// The extraction network. Six parameter groups (speech_encoder,
/// speech_decoder, visual_adapter, mask_estimator, cue_encoder, mar_block);
/// iterating the extractor R times reuses the same tensors, so the census is
/// independent of R. Graph-level methods build onto a caller-owned tape;
/// the plain overloads wrap them for one-shot use.
class AvtseModel {
 public:
  AvtseModel(ModelConfig cfg, uint64_t seed);

  const ModelConfig& Config() const { return cfg_; }
  std::vector<Parameter*> Params() const;
  std::vector<Parameter*> GroupParams(const std::string& group) const;
  Parameter* Find(const std::string& name) const;
  int64_t NumParameterTensors() const { return static_cast<int64_t>(params_.size()); }
  /// Re-randomizes one group in place (stage two trains the recovery block
  /// from scratch while everything else starts from the stage-one weights).
  void ReinitGroup(const std::string& group, uint64_t seed);
  void ZeroGrads();

  // --- graph-level API -----------------------------------------------------

  struct EncodeValues {
    Value post;  // rectified embedding
    Value pre;   // pre-activation (masked-frame detection reads this)
  };
  EncodeValues SpeechEncodeG(Graph& g, Value wave) const;
  Value SpeechDecodeG(Graph& g, Value emb) const;
  Value VisualAdaptG(Graph& g, Value v_raw) const;
  Value EstimateMaskG(Graph& g, Value x, Value cue_upsampled) const;
  Value CueEncodeG(Graph& g, Value s_prev_wave, Value v_prev) const;
  Value MarRefineG(Graph& g, Value x_r, Value v_r) const;
  static Value UpsampleCueG(Graph& g, Value v, int64_t factor);
  /// Trims or edge-pads rows so the cue matches the speech frame count.
  static Value AlignRowsG(Graph& g, Value x, int64_t target_rows);

  struct ExtractValues {
    Value s_hat, x_r, v_r, x0, x0_pre;
    std::vector<Value> intermediate_speech;  // decoded S^0 .. S^{R-1}
    int mask_estimations = 0;
    int cue_refinements = 0;
  };
  ExtractValues ExtractG(Graph& g, Value wave, Value v_raw,
                         bool zero_x0 = false) const;

  struct Stage2Values {
    Value s_hat, x_hat_r, x_r, v_r, x0;
    MaskPair mask;
  };
  Stage2Values ForwardStage2G(Graph& g, Value wave_masked, Value v_raw,
                              int64_t threshold_samples = 20) const;

  /// Ground-truth embedding for the stage-two losses (shared encoder, post).
  Value EncodeReferenceG(Graph& g, Value wave) const;

  // --- plain API -----------------------------------------------------------

  std::pair<FeatureSequence, FeatureSequence> SpeechEncode(
      const Waveform& w) const;
  Waveform SpeechDecode(const FeatureSequence& x) const;
  FeatureSequence VisualAdapt(const FeatureSequence& v_raw) const;
  FeatureSequence EstimateMask(const FeatureSequence& x,
                               const FeatureSequence& cue_upsampled) const;
  FeatureSequence CueEncode(const Waveform& s_prev,
                            const FeatureSequence& v_prev) const;
  FeatureSequence MarRefine(const FeatureSequence& x_r,
                            const FeatureSequence& v_r) const;

  struct ExtractOutput {
    Waveform s_hat;
    FeatureSequence x_r, v_r, x0;
    int mask_estimations = 0;
    int cue_refinements = 0;
  };
  ExtractOutput Extract(const Waveform& x0, const FeatureSequence& v_raw) const;

  struct Stage2Output {
    Waveform s_hat;
    FeatureSequence x_hat_r;
    MaskPair mask;
    std::function<FeatureSequence(const Waveform&)> y_builder;
  };
  Stage2Output ForwardStage2(const Waveform& x0_masked,
                             const FeatureSequence& v_raw,
                             int64_t threshold_samples = 20) const;

 private:
  struct TransformerLayer {
    Parameter *ln1_g, *ln1_b;
    Parameter *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    Parameter *ln2_g, *ln2_b;
    Parameter *ff1_w, *ff1_b, *ff2_w, *ff2_b;
  };
  struct TransformerStack {
    std::vector<TransformerLayer> layers;
    Parameter* pos_embed;
    Parameter *final_g, *final_b;
    int64_t max_positions = 0;
  };
  struct ConvUnit {
    Parameter* weight;
    Parameter* bias;  // may be null
  };

  enum class Init { kFanInUniform, kTruncNormal, kOnes, kZeros, kSmallUniform };
  Parameter* AddParam(const std::string& name, const std::string& group,
                      std::vector<int64_t> shape, Init init);
  void InitTensor(Parameter* p, Init init, class Rng& rng);
  TransformerStack BuildStack(const std::string& prefix,
                              const std::string& group, int64_t layers,
                              int64_t width, int64_t max_positions);
  Value RunStack(Graph& g, const TransformerStack& stack, Value x) const;

  ModelConfig cfg_;
  mutable std::deque<Parameter> params_;  // deque: stable addresses
  std::unordered_map<std::string, Parameter*> by_name_;
  std::unordered_map<std::string, Init> init_kind_;

  // speech encoder / decoder
  Parameter* enc_w_;
  Parameter* dec_w_;
  // visual adapter
  std::vector<ConvUnit> visual_blocks_;
  // mask estimator
  ConvUnit bottleneck_;
  struct TcnBlock {
    ConvUnit expand, dconv, project;
  };
  std::vector<TcnBlock> tcn_blocks_;
  ConvUnit mask_out_;
  // cue encoder
  std::vector<ConvUnit> duration_adapter_;
  ConvUnit pre_adapter_, post_adapter_;
  TransformerStack cue_stack_;
  // recovery block
  ConvUnit mar_in_, mar_out_;
  TransformerStack mar_stack_;
};

}  // namespace avtse

#endif  // AVTSE_MODEL_H_

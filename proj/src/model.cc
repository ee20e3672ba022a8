// src/model.cc

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

#include "avtse/model.h"

#include <cmath>
#include <stdexcept>

#include "avtse/rng.h"

namespace avtse {

FeatureSequence UpsampleCue(const FeatureSequence& v, int64_t factor) {
  if (factor < 1) throw std::invalid_argument("UpsampleCue: factor < 1");
  const int64_t T = v.NumFrames(), C = v.NumChannels();
  FeatureSequence out;
  out.frame_rate = v.frame_rate * static_cast<double>(factor);
  out.data = Tensor({T * factor, C});
  for (int64_t t = 0; t < T; ++t)
    for (int64_t f = 0; f < factor; ++f)
      for (int64_t c = 0; c < C; ++c)
        out.data[(t * factor + f) * C + c] = v.data[t * C + c];
  return out;
}

Tensor WaveformToTensor(const Waveform& w) {
  Tensor t({w.NumSamples(), 1});
  for (int64_t i = 0; i < w.NumSamples(); ++i)
    t[i] = w.samples[static_cast<size_t>(i)];
  return t;
}

Waveform TensorToWaveform(const Tensor& t, int sample_rate) {
  if (t.Rank() != 2 || t.Dim(1) != 1)
    throw std::invalid_argument("TensorToWaveform: expected [T x 1]");
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<size_t>(t.Dim(0)));
  for (int64_t i = 0; i < t.Dim(0); ++i)
    w.samples[static_cast<size_t>(i)] = t[i];
  return w;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

Parameter* AvtseModel::AddParam(const std::string& name,
                                const std::string& group,
                                std::vector<int64_t> shape, Init init) {
  params_.emplace_back(name, group, Tensor(std::move(shape)));
  Parameter* p = &params_.back();
  by_name_[name] = p;
  init_kind_[name] = init;
  return p;
}

void AvtseModel::InitTensor(Parameter* p, Init init, Rng& rng) {
  Tensor& t = p->value;
  switch (init) {
    case Init::kFanInUniform: {
      // fan-in = everything but the leading (output) dimension
      int64_t fan_in = 1;
      for (int i = 1; i < t.Rank(); ++i) fan_in *= t.Dim(i);
      if (fan_in < 1) fan_in = 1;
      const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (int64_t i = 0; i < t.NumEl(); ++i) t[i] = rng.Uniform(-a, a);
      break;
    }
    case Init::kTruncNormal:
      for (int64_t i = 0; i < t.NumEl(); ++i) t[i] = rng.TruncNormal(0.02);
      break;
    case Init::kOnes:
      t.Fill(1.0);
      break;
    case Init::kZeros:
      t.SetZero();
      break;
    case Init::kSmallUniform:
      // Conv/linear biases on rectifier paths start slightly off zero, so
      // dead inputs never park a pre-activation exactly on the ReLU kink
      // (exact kinks break finite-difference gradient verification).
      for (int64_t i = 0; i < t.NumEl(); ++i) t[i] = rng.Uniform(-0.05, 0.05);
      break;
  }
}

AvtseModel::TransformerStack AvtseModel::BuildStack(const std::string& prefix,
                                                    const std::string& group,
                                                    int64_t layers,
                                                    int64_t width,
                                                    int64_t max_positions) {
  TransformerStack s;
  s.max_positions = max_positions;
  s.pos_embed = AddParam(prefix + ".pos_embed", group, {max_positions, width},
                         Init::kTruncNormal);
  const int64_t ff = 4 * width;
  for (int64_t l = 0; l < layers; ++l) {
    const std::string lp = prefix + ".layer" + std::to_string(l) + ".";
    TransformerLayer tl;
    tl.ln1_g = AddParam(lp + "attn_norm.gamma", group, {width}, Init::kOnes);
    tl.ln1_b = AddParam(lp + "attn_norm.beta", group, {width}, Init::kZeros);
    tl.wq = AddParam(lp + "attn.q.weight", group, {width, width}, Init::kTruncNormal);
    tl.bq = AddParam(lp + "attn.q.bias", group, {width}, Init::kZeros);
    tl.wk = AddParam(lp + "attn.k.weight", group, {width, width}, Init::kTruncNormal);
    tl.bk = AddParam(lp + "attn.k.bias", group, {width}, Init::kZeros);
    tl.wv = AddParam(lp + "attn.v.weight", group, {width, width}, Init::kTruncNormal);
    tl.bv = AddParam(lp + "attn.v.bias", group, {width}, Init::kZeros);
    tl.wo = AddParam(lp + "attn.out.weight", group, {width, width}, Init::kTruncNormal);
    tl.bo = AddParam(lp + "attn.out.bias", group, {width}, Init::kZeros);
    tl.ln2_g = AddParam(lp + "ff_norm.gamma", group, {width}, Init::kOnes);
    tl.ln2_b = AddParam(lp + "ff_norm.beta", group, {width}, Init::kZeros);
    tl.ff1_w = AddParam(lp + "ff.in.weight", group, {ff, width}, Init::kTruncNormal);
    tl.ff1_b = AddParam(lp + "ff.in.bias", group, {ff}, Init::kZeros);
    tl.ff2_w = AddParam(lp + "ff.out.weight", group, {width, ff}, Init::kTruncNormal);
    tl.ff2_b = AddParam(lp + "ff.out.bias", group, {width}, Init::kZeros);
    s.layers.push_back(tl);
  }
  s.final_g = AddParam(prefix + ".final_norm.gamma", group, {width}, Init::kOnes);
  s.final_b = AddParam(prefix + ".final_norm.beta", group, {width}, Init::kZeros);
  return s;
}

AvtseModel::AvtseModel(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.Validate();
  const int64_t N = cfg_.encoder_channels;
  const int64_t L = cfg_.encoder_kernel;
  const int64_t B = cfg_.bottleneck_channels;
  const int64_t H = cfg_.conv_channels;
  const int64_t P = cfg_.conv_kernel;
  const int64_t X = cfg_.conv_blocks;
  const int64_t dv = cfg_.visual_channels;
  const int64_t dav = cfg_.av_width;

  enc_w_ = AddParam("speech_encoder.conv.weight", "speech_encoder", {N, 1, L},
                    Init::kFanInUniform);
  dec_w_ = AddParam("speech_decoder.deconv.weight", "speech_decoder",
                    {N, 1, L}, Init::kFanInUniform);

  for (int i = 0; i < 5; ++i) {
    const std::string bp = "visual_adapter.block" + std::to_string(i);
    ConvUnit u;
    u.weight = AddParam(bp + ".conv.weight", "visual_adapter", {dv, dv, 3},
                        Init::kFanInUniform);
    u.bias = AddParam(bp + ".conv.bias", "visual_adapter", {dv}, Init::kSmallUniform);
    visual_blocks_.push_back(u);
  }

  bottleneck_.weight = AddParam("mask_estimator.bottleneck.weight",
                                "mask_estimator", {B, N + dv}, Init::kFanInUniform);
  bottleneck_.bias = AddParam("mask_estimator.bottleneck.bias",
                              "mask_estimator", {B}, Init::kSmallUniform);
  for (int64_t i = 0; i < X; ++i) {
    const std::string bp = "mask_estimator.block" + std::to_string(i) + ".";
    TcnBlock blk;
    blk.expand.weight =
        AddParam(bp + "expand.weight", "mask_estimator", {H, B}, Init::kFanInUniform);
    blk.expand.bias = AddParam(bp + "expand.bias", "mask_estimator", {H}, Init::kSmallUniform);
    blk.dconv.weight =
        AddParam(bp + "dconv.weight", "mask_estimator", {H, P}, Init::kFanInUniform);
    blk.dconv.bias = AddParam(bp + "dconv.bias", "mask_estimator", {H}, Init::kSmallUniform);
    blk.project.weight =
        AddParam(bp + "project.weight", "mask_estimator", {B, H}, Init::kFanInUniform);
    blk.project.bias = AddParam(bp + "project.bias", "mask_estimator", {B}, Init::kSmallUniform);
    tcn_blocks_.push_back(blk);
  }
  mask_out_.weight = AddParam("mask_estimator.output.weight", "mask_estimator",
                              {N, B}, Init::kFanInUniform);
  // Unit bias: the initial mask passes the mixture embedding through, so
  // early training shapes the encoder/decoder instead of first having to
  // grow the mask away from the rectifier's dead zone.
  mask_out_.bias =
      AddParam("mask_estimator.output.bias", "mask_estimator", {N}, Init::kOnes);

  const int64_t adapter_layers = cfg_.DurationAdapterLayers();
  for (int64_t i = 0; i < adapter_layers; ++i) {
    ConvUnit u;
    const int64_t in_ch = i == 0 ? N : dv;
    u.weight = AddParam("cue_encoder.duration" + std::to_string(i) + ".weight",
                        "cue_encoder", {dv, in_ch, 2}, Init::kFanInUniform);
    u.bias = nullptr;  // bias-free, like the speech encoder
    duration_adapter_.push_back(u);
  }
  pre_adapter_.weight = AddParam("cue_encoder.pre_adapter.weight",
                                 "cue_encoder", {dav, 2 * dv}, Init::kFanInUniform);
  pre_adapter_.bias =
      AddParam("cue_encoder.pre_adapter.bias", "cue_encoder", {dav}, Init::kSmallUniform);
  cue_stack_ = BuildStack("cue_encoder.transformer", "cue_encoder",
                          cfg_.av_layers, dav, cfg_.max_cue_positions);
  post_adapter_.weight = AddParam("cue_encoder.post_adapter.weight",
                                  "cue_encoder", {dv, dav}, Init::kFanInUniform);
  post_adapter_.bias =
      AddParam("cue_encoder.post_adapter.bias", "cue_encoder", {dv}, Init::kSmallUniform);

  mar_in_.weight = AddParam("mar_block.input_proj.weight", "mar_block",
                            {dav, N + dv}, Init::kFanInUniform);
  mar_in_.bias = AddParam("mar_block.input_proj.bias", "mar_block", {dav}, Init::kSmallUniform);
  mar_stack_ = BuildStack("mar_block.transformer", "mar_block", cfg_.mar_layers,
                          dav, cfg_.max_mar_positions);
  mar_out_.weight = AddParam("mar_block.output_proj.weight", "mar_block",
                             {N, dav}, Init::kFanInUniform);
  mar_out_.bias = AddParam("mar_block.output_proj.bias", "mar_block", {N}, Init::kSmallUniform);

  Rng rng(seed);
  for (Parameter& p : params_) InitTensor(&p, init_kind_.at(p.name), rng);
}

std::vector<Parameter*> AvtseModel::Params() const {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (Parameter& p : params_) out.push_back(&p);
  return out;
}

std::vector<Parameter*> AvtseModel::GroupParams(const std::string& group) const {
  std::vector<Parameter*> out;
  for (Parameter& p : params_)
    if (p.group == group) out.push_back(&p);
  return out;
}

Parameter* AvtseModel::Find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

void AvtseModel::ReinitGroup(const std::string& group, uint64_t seed) {
  Rng rng(seed);
  for (Parameter& p : params_)
    if (p.group == group) InitTensor(&p, init_kind_.at(p.name), rng);
}

void AvtseModel::ZeroGrads() {
  for (Parameter& p : params_) p.grad.SetZero();
}

// ---------------------------------------------------------------------------
// Graph-level forward
// ---------------------------------------------------------------------------

AvtseModel::EncodeValues AvtseModel::SpeechEncodeG(Graph& g, Value wave) const {
  const Tensor& t = g.Data(wave);
  if (t.Rank() != 2 || t.Dim(1) != 1)
    throw std::invalid_argument("SpeechEncode: expected [T x 1] waveform");
  if (t.Dim(0) < cfg_.encoder_kernel)
    throw std::invalid_argument("SpeechEncode: input shorter than kernel");
  Value pre = g.Conv1d(wave, g.Param(enc_w_), Value{}, cfg_.Stride(), 1, 0);
  return {g.Relu(pre), pre};
}

Value AvtseModel::SpeechDecodeG(Graph& g, Value emb) const {
  const Tensor& t = g.Data(emb);
  if (t.Rank() != 2 || t.Dim(1) != cfg_.encoder_channels)
    throw std::invalid_argument("SpeechDecode: channel mismatch");
  return g.ConvT1d(emb, g.Param(dec_w_), cfg_.Stride());
}

Value AvtseModel::VisualAdaptG(Graph& g, Value v_raw) const {
  const Tensor& t = g.Data(v_raw);
  if (t.Rank() != 2 || t.Dim(1) != cfg_.visual_channels)
    throw std::invalid_argument("VisualAdapt: wrong channel count");
  Value v = v_raw;
  for (const ConvUnit& u : visual_blocks_) {
    Value h = g.Relu(v);
    h = g.Conv1d(h, g.Param(u.weight), g.Param(u.bias), 1, 1, 1);
    v = g.Add(v, h);
  }
  return v;
}

Value AvtseModel::UpsampleCueG(Graph& g, Value v, int64_t factor) {
  return g.RepeatRows(v, factor);
}

Value AvtseModel::AlignRowsG(Graph& g, Value x, int64_t target_rows) {
  const int64_t rows = g.Data(x).Dim(0);
  if (rows == target_rows) return x;
  if (rows > target_rows) return g.SliceRows(x, 0, target_rows);
  return g.EdgePadRows(x, target_rows - rows);
}

Value AvtseModel::EstimateMaskG(Graph& g, Value x, Value cue_upsampled) const {
  const Tensor& tx = g.Data(x);
  if (tx.Dim(1) != cfg_.encoder_channels)
    throw std::invalid_argument("EstimateMask: speech channel mismatch");
  if (g.Data(cue_upsampled).Dim(1) != cfg_.visual_channels)
    throw std::invalid_argument("EstimateMask: cue channel mismatch");
  Value cue = AlignRowsG(g, cue_upsampled, tx.Dim(0));
  Value h = g.ConcatCols(x, cue);
  Value b = g.Linear(h, g.Param(bottleneck_.weight), g.Param(bottleneck_.bias));
  int64_t dilation = 1;
  for (const TcnBlock& blk : tcn_blocks_) {
    Value e = g.Relu(
        g.Linear(b, g.Param(blk.expand.weight), g.Param(blk.expand.bias)));
    const int64_t pad = (cfg_.conv_kernel - 1) * dilation / 2;
    e = g.Relu(g.DwConv1d(e, g.Param(blk.dconv.weight),
                          g.Param(blk.dconv.bias), dilation, pad));
    Value pr =
        g.Linear(e, g.Param(blk.project.weight), g.Param(blk.project.bias));
    b = g.Add(b, pr);
    dilation *= 2;
  }
  return g.Relu(
      g.Linear(b, g.Param(mask_out_.weight), g.Param(mask_out_.bias)));
}

Value AvtseModel::RunStack(Graph& g, const TransformerStack& stack,
                           Value x) const {
  const int64_t T = g.Data(x).Dim(0);
  if (T > stack.max_positions)
    throw std::invalid_argument(
        "transformer input longer than the learned position table (" +
        std::to_string(T) + " > " + std::to_string(stack.max_positions) + ")");
  Value pos = g.SliceRows(g.Param(stack.pos_embed), 0, T);
  x = g.Add(x, pos);
  for (const TransformerLayer& tl : stack.layers) {
    Value a = g.LayerNorm(x, g.Param(tl.ln1_g), g.Param(tl.ln1_b));
    Value q = g.Linear(a, g.Param(tl.wq), g.Param(tl.bq));
    Value k = g.Linear(a, g.Param(tl.wk), g.Param(tl.bk));
    Value v = g.Linear(a, g.Param(tl.wv), g.Param(tl.bv));
    Value att = g.Attention(q, k, v, cfg_.av_heads);
    Value o = g.Linear(att, g.Param(tl.wo), g.Param(tl.bo));
    x = g.Add(x, o);
    Value f = g.LayerNorm(x, g.Param(tl.ln2_g), g.Param(tl.ln2_b));
    Value hmid = g.Gelu(g.Linear(f, g.Param(tl.ff1_w), g.Param(tl.ff1_b)));
    Value y = g.Linear(hmid, g.Param(tl.ff2_w), g.Param(tl.ff2_b));
    x = g.Add(x, y);
  }
  return g.LayerNorm(x, g.Param(stack.final_g), g.Param(stack.final_b));
}

Value AvtseModel::CueEncodeG(Graph& g, Value s_prev_wave, Value v_prev) const {
  if (g.Data(v_prev).Dim(1) != cfg_.visual_channels)
    throw std::invalid_argument("CueEncode: visual channel mismatch");
  // Re-encode the intermediate speech with the shared encoder, then halve
  // the rate log2(ratio) times down to the video rate.
  Value a = SpeechEncodeG(g, s_prev_wave).post;
  for (const ConvUnit& u : duration_adapter_)
    a = g.Gelu(g.Conv1d(a, g.Param(u.weight), Value{}, 2, 1, 0));
  const int64_t t_min = std::min(g.Data(a).Dim(0), g.Data(v_prev).Dim(0));
  a = AlignRowsG(g, a, t_min);
  Value vp = AlignRowsG(g, v_prev, t_min);
  Value fused = g.ConcatCols(vp, a);
  Value pre =
      g.Linear(fused, g.Param(pre_adapter_.weight), g.Param(pre_adapter_.bias));
  Value refined = RunStack(g, cue_stack_, pre);
  return g.Linear(refined, g.Param(post_adapter_.weight),
                  g.Param(post_adapter_.bias));
}

AvtseModel::ExtractValues AvtseModel::ExtractG(Graph& g, Value wave,
                                               Value v_raw,
                                               bool zero_x0) const {
  ExtractValues out;
  EncodeValues enc = SpeechEncodeG(g, wave);
  out.x0_pre = enc.pre;
  Value x0 = enc.post;
  if (zero_x0) x0 = g.Input(Tensor(g.Data(x0).Shape()));
  out.x0 = x0;
  const int64_t factor = cfg_.UpsampleFactor();

  Value v = VisualAdaptG(g, v_raw);
  Value m = EstimateMaskG(g, x0, UpsampleCueG(g, v, factor));
  out.mask_estimations = 1;
  for (int64_t r = 1; r <= cfg_.extractor_iterations; ++r) {
    Value s_prev = SpeechDecodeG(g, g.Mul(m, x0));
    out.intermediate_speech.push_back(s_prev);
    v = CueEncodeG(g, s_prev, v);
    out.cue_refinements++;
    Value x_prev = SpeechEncodeG(g, s_prev).post;
    m = EstimateMaskG(g, x_prev, UpsampleCueG(g, v, factor));
    out.mask_estimations++;
  }
  out.v_r = v;
  out.x_r = g.Mul(m, x0);
  out.s_hat = SpeechDecodeG(g, out.x_r);
  return out;
}

Value AvtseModel::MarRefineG(Graph& g, Value x_r, Value v_r) const {
  const int64_t speech_frames = g.Data(x_r).Dim(0);
  if (g.Data(x_r).Dim(1) != cfg_.encoder_channels)
    throw std::invalid_argument("MarRefine: speech channel mismatch");
  if (g.Data(v_r).Dim(1) != cfg_.visual_channels)
    throw std::invalid_argument("MarRefine: cue channel mismatch");
  Value up = UpsampleCueG(g, v_r, cfg_.UpsampleFactor());
  up = AlignRowsG(g, up, speech_frames);
  Value cat = g.ConcatCols(x_r, up);
  Value h = g.Linear(cat, g.Param(mar_in_.weight), g.Param(mar_in_.bias));
  h = RunStack(g, mar_stack_, h);
  Value delta = g.Linear(h, g.Param(mar_out_.weight), g.Param(mar_out_.bias));
  // Residual from the extractor output: unmasked regions are refined
  // starting from X^R, masked regions (where X^R is zero) are predicted
  // outright by the stack.
  return g.Add(x_r, delta);
}

AvtseModel::Stage2Values AvtseModel::ForwardStage2G(
    Graph& g, Value wave_masked, Value v_raw, int64_t threshold_samples) const {
  Stage2Values out;
  ExtractValues ex = ExtractG(g, wave_masked, v_raw);
  out.x0 = ex.x0;
  out.x_r = ex.x_r;
  out.v_r = ex.v_r;
  FeatureSequence pre;
  pre.frame_rate = cfg_.EmbeddingRate();
  pre.data = g.Data(ex.x0_pre);
  out.mask = DetectMaskedFrames(pre, threshold_samples, cfg_.Stride(),
                                cfg_.encoder_kernel);
  out.x_hat_r = MarRefineG(g, ex.x_r, ex.v_r);
  out.s_hat = SpeechDecodeG(g, out.x_hat_r);
  return out;
}

Value AvtseModel::EncodeReferenceG(Graph& g, Value wave) const {
  return SpeechEncodeG(g, wave).post;
}

// ---------------------------------------------------------------------------
// Plain wrappers
// ---------------------------------------------------------------------------

namespace {
FeatureSequence MakeFeatures(const Tensor& t, double rate) {
  FeatureSequence f;
  f.data = t;
  f.frame_rate = rate;
  return f;
}
}  // namespace

std::pair<FeatureSequence, FeatureSequence> AvtseModel::SpeechEncode(
    const Waveform& w) const {
  if (w.sample_rate != cfg_.sample_rate)
    throw std::invalid_argument("SpeechEncode: sample rate mismatch");
  Graph g;
  EncodeValues e = SpeechEncodeG(g, g.Input(WaveformToTensor(w)));
  const double rate = cfg_.EmbeddingRate();
  return {MakeFeatures(g.Data(e.post), rate), MakeFeatures(g.Data(e.pre), rate)};
}

Waveform AvtseModel::SpeechDecode(const FeatureSequence& x) const {
  Graph g;
  Value y = SpeechDecodeG(g, g.Input(x.data));
  return TensorToWaveform(g.Data(y), cfg_.sample_rate);
}

FeatureSequence AvtseModel::VisualAdapt(const FeatureSequence& v_raw) const {
  Graph g;
  Value v = VisualAdaptG(g, g.Input(v_raw.data));
  return MakeFeatures(g.Data(v), cfg_.video_fps);
}

FeatureSequence AvtseModel::EstimateMask(
    const FeatureSequence& x, const FeatureSequence& cue_upsampled) const {
  Graph g;
  Value m = EstimateMaskG(g, g.Input(x.data), g.Input(cue_upsampled.data));
  return MakeFeatures(g.Data(m), cfg_.EmbeddingRate());
}

FeatureSequence AvtseModel::CueEncode(const Waveform& s_prev,
                                      const FeatureSequence& v_prev) const {
  Graph g;
  Value v = CueEncodeG(g, g.Input(WaveformToTensor(s_prev)),
                       g.Input(v_prev.data));
  return MakeFeatures(g.Data(v), cfg_.video_fps);
}

FeatureSequence AvtseModel::MarRefine(const FeatureSequence& x_r,
                                      const FeatureSequence& v_r) const {
  Graph g;
  Value y = MarRefineG(g, g.Input(x_r.data), g.Input(v_r.data));
  return MakeFeatures(g.Data(y), cfg_.EmbeddingRate());
}

AvtseModel::ExtractOutput AvtseModel::Extract(
    const Waveform& x0, const FeatureSequence& v_raw) const {
  if (x0.sample_rate != cfg_.sample_rate)
    throw std::invalid_argument("Extract: sample rate mismatch");
  Graph g;
  ExtractValues e =
      ExtractG(g, g.Input(WaveformToTensor(x0)), g.Input(v_raw.data));
  ExtractOutput out;
  out.s_hat = TensorToWaveform(g.Data(e.s_hat), cfg_.sample_rate);
  out.x_r = MakeFeatures(g.Data(e.x_r), cfg_.EmbeddingRate());
  out.v_r = MakeFeatures(g.Data(e.v_r), cfg_.video_fps);
  out.x0 = MakeFeatures(g.Data(e.x0), cfg_.EmbeddingRate());
  out.mask_estimations = e.mask_estimations;
  out.cue_refinements = e.cue_refinements;
  return out;
}

AvtseModel::Stage2Output AvtseModel::ForwardStage2(
    const Waveform& x0_masked, const FeatureSequence& v_raw,
    int64_t threshold_samples) const {
  if (x0_masked.sample_rate != cfg_.sample_rate)
    throw std::invalid_argument("ForwardStage2: sample rate mismatch");
  Graph g;
  Stage2Values s = ForwardStage2G(g, g.Input(WaveformToTensor(x0_masked)),
                                  g.Input(v_raw.data), threshold_samples);
  Stage2Output out;
  out.s_hat = TensorToWaveform(g.Data(s.s_hat), cfg_.sample_rate);
  out.x_hat_r = MakeFeatures(g.Data(s.x_hat_r), cfg_.EmbeddingRate());
  out.mask = s.mask;
  const AvtseModel* self = this;
  out.y_builder = [self](const Waveform& y) {
    return self->SpeechEncode(y).first;
  };
  return out;
}

}  // namespace avtse

// tests/test_model.cc

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

#include <doctest.h>

#include <cmath>
#include <set>

#include "avtse/mixture_sim.h"
#include "avtse/model.h"
#include "avtse/rng.h"
#include "test_util.h"

using namespace avtse;
using testutil::RandomTensor;

namespace {

ModelConfig TinyConfig(int64_t iterations = 2) {
  ModelConfig cfg;
  cfg.encoder_channels = 8;
  cfg.bottleneck_channels = 8;
  cfg.conv_channels = 16;
  cfg.conv_blocks = 2;
  cfg.extractor_iterations = iterations;
  cfg.visual_channels = 8;
  cfg.av_width = 16;
  cfg.av_heads = 2;
  cfg.av_layers = 2;
  cfg.mar_layers = 2;
  cfg.max_mar_positions = 4000;
  return cfg;
}

Waveform RandomWave(int64_t n, Rng& rng) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(static_cast<size_t>(n));
  for (auto& s : w.samples) s = 0.5 * (2.0 * rng.Uniform() - 1.0);
  return w;
}

FeatureSequence RandomVisual(int64_t frames, int64_t channels, Rng& rng) {
  FeatureSequence v;
  v.frame_rate = 25.0;
  v.data = RandomTensor({frames, channels}, rng, 0.5);
  return v;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("encoder shape, zero propagation, rectifier") {
  Rng rng(61);
  AvtseModel model(TinyConfig(), 1);
  Waveform w = RandomWave(64000, rng);
  auto [post, pre] = model.SpeechEncode(w);
  CHECK(pre.NumFrames() == 3199);
  CHECK(pre.NumChannels() == 8);
  CHECK(pre.frame_rate == doctest::Approx(800.0));
  for (int64_t i = 0; i < post.data.NumEl(); ++i) CHECK(post.data[i] >= 0.0);

  Waveform zero;
  zero.sample_rate = 16000;
  zero.samples.assign(4000, 0.0);
  auto pre0 = model.SpeechEncode(zero).second;
  for (int64_t i = 0; i < pre0.data.NumEl(); ++i) CHECK(pre0.data[i] == 0.0);

  Waveform tooshort;
  tooshort.sample_rate = 16000;
  tooshort.samples.assign(10, 0.1);
  CHECK_THROWS(model.SpeechEncode(tooshort));
}

TEST_CASE("decoder length arithmetic and linearity") {
  Rng rng(62);
  AvtseModel model(TinyConfig(), 1);
  FeatureSequence x;
  x.frame_rate = 800.0;
  x.data = RandomTensor({3199, 8}, rng);
  Waveform y = model.SpeechDecode(x);
  CHECK(y.NumSamples() == 64000);  // 3198*20 + 40

  FeatureSequence zero;
  zero.frame_rate = 800.0;
  zero.data = Tensor({100, 8});
  Waveform yz = model.SpeechDecode(zero);
  for (double s : yz.samples) CHECK(s == 0.0);

  // decode(encode(w)) length equals input length when T = 0 mod stride.
  Waveform w = RandomWave(16000, rng);
  auto post = model.SpeechEncode(w).first;
  CHECK(model.SpeechDecode(post).NumSamples() == 16000);

  FeatureSequence bad;
  bad.frame_rate = 800.0;
  bad.data = RandomTensor({10, 5}, rng);
  CHECK_THROWS(model.SpeechDecode(bad));
}

TEST_CASE("visual adapter preserves shape and is deterministic") {
  Rng rng(63);
  AvtseModel model(TinyConfig(), 1);
  FeatureSequence v = RandomVisual(100, 8, rng);
  FeatureSequence a = model.VisualAdapt(v);
  CHECK(a.NumFrames() == 100);
  CHECK(a.NumChannels() == 8);
  FeatureSequence b = model.VisualAdapt(v);
  for (int64_t i = 0; i < a.data.NumEl(); ++i) CHECK(a.data[i] == b.data[i]);
  FeatureSequence wrong = RandomVisual(100, 5, rng);
  CHECK_THROWS(model.VisualAdapt(wrong));
}

TEST_CASE("upsample repeats each frame exactly factor times") {
  Rng rng(64);
  FeatureSequence v = RandomVisual(100, 8, rng);
  FeatureSequence up = UpsampleCue(v, 32);
  CHECK(up.NumFrames() == 3200);
  for (int64_t t = 0; t < 100; ++t)
    for (int64_t f = 0; f < 32; ++f)
      for (int64_t c = 0; c < 8; ++c)
        CHECK(up.data[(t * 32 + f) * 8 + c] == v.data[t * 8 + c]);

  FeatureSequence constant;
  constant.frame_rate = 25.0;
  constant.data = Tensor({5, 3});
  constant.data.Fill(1.25);
  FeatureSequence cu = UpsampleCue(constant, 4);
  for (int64_t i = 0; i < cu.data.NumEl(); ++i) CHECK(cu.data[i] == 1.25);
}

TEST_CASE("mask estimator: shape, nonnegativity, receptive field") {
  Rng rng(65);
  ModelConfig cfg = TinyConfig();
  cfg.conv_blocks = 7;
  cfg.conv_kernel = 3;
  AvtseModel model(cfg, 1);

  // Receptive field from the dilation sum: sum (P-1)*2^i, i<X -> 254.
  int64_t rf = 0;
  for (int64_t i = 0; i < cfg.conv_blocks; ++i)
    rf += (cfg.conv_kernel - 1) * (int64_t{1} << i);
  CHECK(rf == 254);

  const int64_t T = 600;
  FeatureSequence x;
  x.frame_rate = 800.0;
  x.data = RandomTensor({T, 8}, rng);
  FeatureSequence cue;
  cue.frame_rate = 800.0;
  cue.data = RandomTensor({T, 8}, rng);
  FeatureSequence m = model.EstimateMask(x, cue);
  CHECK(m.NumFrames() == T);
  CHECK(m.NumChannels() == 8);
  for (int64_t i = 0; i < m.data.NumEl(); ++i) CHECK(m.data[i] >= 0.0);

  // Empirical receptive field: perturb one frame, observe which outputs
  // move. The span must match the dilation sum (a 254-frame reach means
  // at most 127 to each side).
  FeatureSequence x2 = x;
  const int64_t probe = T / 2;
  for (int64_t c = 0; c < 8; ++c) x2.data[probe * 8 + c] += 1.0;
  FeatureSequence m2 = model.EstimateMask(x2, cue);
  int64_t lo = T, hi = -1;
  for (int64_t t = 0; t < T; ++t)
    for (int64_t c = 0; c < 8; ++c)
      if (m.data[t * 8 + c] != m2.data[t * 8 + c]) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
        break;
      }
  CHECK(lo >= probe - rf / 2);
  CHECK(hi <= probe + rf / 2);
  CHECK(hi - lo >= rf / 2);  // the probe frame reaches most of its field
}

TEST_CASE("cue encoder shape arithmetic and rates") {
  Rng rng(66);
  AvtseModel model(TinyConfig(), 1);
  Waveform s_prev = RandomWave(64000, rng);
  FeatureSequence v_prev = RandomVisual(100, 8, rng);
  FeatureSequence v = model.CueEncode(s_prev, v_prev);
  // 64000 samples -> 3199 frames -> /32 -> 99 frames, fused at 99.
  CHECK(v.NumFrames() == 99);
  CHECK(v.NumChannels() == 8);
  CHECK(v.frame_rate == doctest::Approx(25.0));
  // The duration adapter lands exactly on the video frame rate.
  CHECK(model.Config().UpsampleFactor() == 32);
  CHECK(model.Config().DurationAdapterLayers() == 5);
}

TEST_CASE("extract counts, shapes, and the zero-x0 annihilation property") {
  Rng rng(67);
  for (int64_t R : {1, 2, 4}) {
    AvtseModel model(TinyConfig(R), 1);
    Waveform mix = RandomWave(64000, rng);
    FeatureSequence vis = RandomVisual(100, 8, rng);
    auto out = model.Extract(mix, vis);
    CHECK(out.mask_estimations == R + 1);
    CHECK(out.cue_refinements == R);
    CHECK(out.s_hat.NumSamples() == 64000);
    CHECK(out.x_r.NumFrames() == 3199);
    CHECK(out.x0.NumFrames() == 3199);
  }

  // Parameter census must not depend on R.
  AvtseModel m2(TinyConfig(2), 1);
  AvtseModel m4(TinyConfig(4), 1);
  CHECK(m2.NumParameterTensors() == m4.NumParameterTensors());
  std::set<std::string> n2, n4;
  for (auto* p : m2.Params()) n2.insert(p->name);
  for (auto* p : m4.Params()) n4.insert(p->name);
  CHECK(n2 == n4);

  // Zeroing X0 forces every intermediate estimate (and s_hat) to zero,
  // because every mask multiplies X0 and the decoder is bias-free.
  AvtseModel model(TinyConfig(3), 1);
  Graph g;
  Rng rng2(68);
  Waveform mix = RandomWave(32000, rng2);
  FeatureSequence vis = RandomVisual(50, 8, rng2);
  auto values = model.ExtractG(g, g.Input(WaveformToTensor(mix)),
                               g.Input(vis.data), /*zero_x0=*/true);
  REQUIRE(values.intermediate_speech.size() == 3);
  for (Value s : values.intermediate_speech) {
    const Tensor& t = g.Data(s);
    for (int64_t i = 0; i < t.NumEl(); ++i) REQUIRE(t[i] == 0.0);
  }
  const Tensor& sh = g.Data(values.s_hat);
  for (int64_t i = 0; i < sh.NumEl(); ++i) REQUIRE(sh[i] == 0.0);
}

TEST_CASE("recovery block output matches the speech embedding shape") {
  Rng rng(69);
  AvtseModel model(TinyConfig(), 1);
  FeatureSequence x_r;
  x_r.frame_rate = 800.0;
  x_r.data = RandomTensor({3199, 8}, rng);
  FeatureSequence v_r;
  v_r.frame_rate = 25.0;
  v_r.data = RandomTensor({99, 8}, rng);
  FeatureSequence y = model.MarRefine(x_r, v_r);
  CHECK(y.NumFrames() == 3199);
  CHECK(y.NumChannels() == 8);
  // No positivity constraint: a random projection should go negative
  // somewhere.
  bool has_negative = false;
  for (int64_t i = 0; i < y.data.NumEl(); ++i)
    if (y.data[i] < 0.0) has_negative = true;
  CHECK(has_negative);
}

TEST_CASE("stage-2 forward: detection, degenerate mask, shapes") {
  Rng rng(70);
  AvtseModel model(TinyConfig(), 1);
  Waveform mix = RandomWave(64000, rng);
  // Keep samples away from zero so detection sees no natural zero frames.
  for (auto& s : mix.samples)
    if (std::abs(s) < 0.05) s = 0.05;
  FeatureSequence vis = RandomVisual(100, 8, rng);

  SUBCASE("intact input yields an all-unmasked pair") {
    auto out = model.ForwardStage2(mix, vis);
    CHECK(out.mask.NumMasked() == 0);
    CHECK(out.s_hat.NumSamples() == 64000);
    CHECK(out.x_hat_r.NumFrames() == 3199);
    FeatureSequence y_emb = out.y_builder(mix);
    CHECK(y_emb.NumFrames() == 3199);
    CHECK(y_emb.NumChannels() == 8);
  }
  SUBCASE("a 300 ms gap is detected at embedding resolution") {
    Waveform masked = ApplyZeroMask(mix, 1.0, 0.3);
    auto out = model.ForwardStage2(masked, vis);
    CHECK(out.mask.NumMasked() == 239);
    CHECK(out.s_hat.NumSamples() == 64000);
  }
}

TEST_CASE("checkpoint-grade determinism: same seed, same outputs") {
  Rng rng(71);
  AvtseModel a(TinyConfig(), 42);
  AvtseModel b(TinyConfig(), 42);
  Waveform mix = RandomWave(16000, rng);
  FeatureSequence vis = RandomVisual(25, 8, rng);
  auto oa = a.Extract(mix, vis);
  auto ob = b.Extract(mix, vis);
  for (size_t i = 0; i < oa.s_hat.samples.size(); ++i)
    CHECK(oa.s_hat.samples[i] == ob.s_hat.samples[i]);
}

}  // TEST_SUITE

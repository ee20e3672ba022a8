// tests/test_objectives.cc

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

#include "avtse/objectives.h"
#include "avtse/rng.h"
#include "test_util.h"

using namespace avtse;

namespace {

Waveform FromVector(std::vector<double> v) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples = std::move(v);
  return w;
}

// Straight-line transcription of the loss formula, kept independent of the
// graph implementation (the oracle of the SI-SDR acceptance check).
double SiSdrOracle(const std::vector<double>& y, const std::vector<double>& s,
                   double eps = 1e-8) {
  double sy = 0.0, yy = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    sy += s[i] * y[i];
    yy += y[i] * y[i];
  }
  const double a = sy / yy;
  double num = eps, den = eps;
  for (size_t i = 0; i < y.size(); ++i) {
    num += a * y[i] * a * y[i];
    const double e = s[i] - a * y[i];
    den += e * e;
  }
  return -10.0 * std::log10(num / den);
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("perfect reconstruction drives the loss strongly negative") {
  Rng rng(81);
  std::vector<double> y(64000);
  for (auto& v : y) v = 2.0 * rng.Uniform() - 1.0;  // ~unit power, 4 s
  const double loss = SiSdrLoss(FromVector(y), FromVector(y));
  CHECK(loss <= -60.0);
}

TEST_CASE("scale invariance of the SI-SDR loss") {
  Rng rng(82);
  std::vector<double> y(2000), s(2000);
  for (auto& v : y) v = 2.0 * rng.Uniform() - 1.0;
  for (size_t i = 0; i < s.size(); ++i)
    s[i] = y[i] + 0.3 * (2.0 * rng.Uniform() - 1.0);
  const double base = SiSdrLoss(FromVector(y), FromVector(s));
  for (double c : {0.1, 3.0}) {
    std::vector<double> sc(s);
    for (auto& v : sc) v *= c;
    CHECK(std::abs(SiSdrLoss(FromVector(y), FromVector(sc)) - base) < 1e-6);
  }
}

TEST_CASE("hand case: y=(1,0), s=(1,1) gives 0 dB") {
  const double loss = SiSdrLoss(FromVector({1.0, 0.0}), FromVector({1.0, 1.0}));
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("graph loss matches the independent formula oracle") {
  Rng rng(83);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 16 + static_cast<size_t>(rng.UniformInt(64));
    std::vector<double> y(n), s(n);
    for (auto& v : y) v = 2.0 * rng.Uniform() - 1.0;
    for (auto& v : s) v = 2.0 * rng.Uniform() - 1.0;
    const double got = SiSdrLoss(FromVector(y), FromVector(s));
    const double want = SiSdrOracle(y, s);
    CHECK(std::abs(got - want) < 1e-9);
  }
}

TEST_CASE("zero-power reference is rejected") {
  CHECK_THROWS(SiSdrLoss(FromVector({0.0, 0.0, 0.0}), FromVector({1.0, 2.0, 3.0})));
}

TEST_CASE("masked losses: hand cases and the partition identity") {
  SUBCASE("1x1 masked case: X=3, Y=1 -> recover 4, tse 0") {
    FeatureSequence x, y;
    x.frame_rate = y.frame_rate = 800.0;
    x.data = Tensor({1, 1});
    y.data = Tensor({1, 1});
    x.data[0] = 3.0;
    y.data[0] = 1.0;
    MaskPair mp;
    mp.masked = {1};
    mp.unmasked = {0};
    auto [rec, tse] = MaskedMseLosses(x, y, mp);
    CHECK(rec == doctest::Approx(4.0));
    CHECK(tse == doctest::Approx(0.0));
  }
  SUBCASE("perfect prediction gives (0, 0)") {
    Rng rng(84);
    FeatureSequence x;
    x.frame_rate = 800.0;
    x.data = testutil::RandomTensor({20, 4}, rng);
    MaskPair mp;
    mp.masked.assign(20, 0);
    mp.unmasked.assign(20, 1);
    mp.masked[3] = 1;
    mp.unmasked[3] = 0;
    auto [rec, tse] = MaskedMseLosses(x, x, mp);
    CHECK(rec == 0.0);
    CHECK(tse == 0.0);
  }
  SUBCASE("empty masked set leaves recover at zero") {
    Rng rng(85);
    FeatureSequence x, y;
    x.frame_rate = y.frame_rate = 800.0;
    x.data = testutil::RandomTensor({10, 3}, rng);
    y.data = testutil::RandomTensor({10, 3}, rng);
    MaskPair mp;
    mp.masked.assign(10, 0);
    mp.unmasked.assign(10, 1);
    auto [rec, tse] = MaskedMseLosses(x, y, mp);
    CHECK(rec == 0.0);
    CHECK(tse > 0.0);
  }
  SUBCASE("recover + tse equals the full-tensor MSE") {
    // Values on a 2^-10 grid keep every square and sum exactly
    // representable, so the identity holds with zero tolerance.
    Rng rng(86);
    FeatureSequence x, y;
    x.frame_rate = y.frame_rate = 800.0;
    x.data = Tensor({64, 4});
    y.data = Tensor({64, 4});
    for (int64_t i = 0; i < x.data.NumEl(); ++i) {
      x.data[i] = static_cast<double>(rng.UniformInt(2048) - 1024) / 1024.0;
      y.data[i] = static_cast<double>(rng.UniformInt(2048) - 1024) / 1024.0;
    }
    MaskPair mp;
    mp.masked.assign(64, 0);
    mp.unmasked.assign(64, 1);
    for (int64_t j = 20; j < 44; ++j) {
      mp.masked[static_cast<size_t>(j)] = 1;
      mp.unmasked[static_cast<size_t>(j)] = 0;
    }
    auto [rec, tse] = MaskedMseLosses(x, y, mp);
    double full = 0.0;
    for (int64_t i = 0; i < x.data.NumEl(); ++i) {
      const double d = x.data[i] - y.data[i];
      full += d * d;
    }
    full /= static_cast<double>(x.data.NumEl());
    CHECK(rec + tse == doctest::Approx(full).epsilon(1e-14));
  }
}

TEST_CASE("total loss is the stated weighted sum") {
  Rng rng(87);
  std::vector<double> yv(400), sv(400);
  for (auto& v : yv) v = 2.0 * rng.Uniform() - 1.0;
  for (auto& v : sv) v = 2.0 * rng.Uniform() - 1.0;
  Waveform y = FromVector(yv), s = FromVector(sv);
  FeatureSequence xh, ye;
  xh.frame_rate = ye.frame_rate = 800.0;
  xh.data = testutil::RandomTensor({19, 4}, rng);
  ye.data = testutil::RandomTensor({19, 4}, rng);
  MaskPair mp;
  mp.masked.assign(19, 0);
  mp.unmasked.assign(19, 1);
  for (int j = 5; j < 9; ++j) {
    mp.masked[static_cast<size_t>(j)] = 1;
    mp.unmasked[static_cast<size_t>(j)] = 0;
  }
  const double l_sisdr = SiSdrLoss(y, s);
  auto [l_rec, l_tse] = MaskedMseLosses(xh, ye, mp);
  LossWeights w{1.0, 5.0, 1.0};
  const double total = TotalLoss(y, s, xh, ye, mp, w);
  CHECK(total ==
        doctest::Approx(l_sisdr + 5.0 * l_rec + l_tse).epsilon(1e-12));

  SUBCASE("stage-1 weights reduce to the SI-SDR loss alone") {
    LossWeights w1{1.0, 0.0, 0.0};
    CHECK(TotalLoss(y, s, xh, ye, mp, w1) == doctest::Approx(l_sisdr));
  }
  SUBCASE("explicit weighted-sum example") {
    // component losses (2.0, 0.1, 0.3) with weights (1,5,1) -> 2.8
    CHECK(1.0 * 2.0 + 5.0 * 0.1 + 1.0 * 0.3 == doctest::Approx(2.8));
  }
}

TEST_CASE("losses are differentiable end to end") {
  Rng rng(88);
  Parameter s("s", "test", testutil::RandomTensor({50, 1}, rng));
  Parameter xh("xh", "test", testutil::RandomTensor({12, 3}, rng));
  Tensor y = testutil::RandomTensor({50, 1}, rng);
  Tensor ye = testutil::RandomTensor({12, 3}, rng);
  MaskPair mp;
  mp.masked.assign(12, 0);
  mp.unmasked.assign(12, 1);
  for (int j = 4; j < 8; ++j) {
    mp.masked[static_cast<size_t>(j)] = 1;
    mp.unmasked[static_cast<size_t>(j)] = 0;
  }
  const double err = testutil::MaxGradError(
      {&s, &xh},
      [&](Graph& g) {
        LossWeights w{1.0, 5.0, 1.0};
        return TotalLossG(g, g.Input(y), g.Param(&s), g.Param(&xh),
                          g.Input(ye), mp, w);
      },
      1e-6);
  CHECK(err < 1e-6);
}

}  // TEST_SUITE

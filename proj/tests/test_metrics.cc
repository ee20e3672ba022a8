// tests/test_metrics.cc

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
#include <fstream>

#include "avtse/metrics.h"
#include "avtse/mixture_sim.h"
#include "avtse/objectives.h"
#include "avtse/rng.h"
#include "test_util.h"

using namespace avtse;
using namespace avtse::metrics;
using testutil::TempDir;

namespace {

Waveform SpeechLike(uint64_t seed, double seconds = 4.0) {
  // A harmonic burst pattern with enough active frames for STOI.
  Rng rng(seed);
  Waveform w;
  w.sample_rate = 16000;
  const int64_t n = static_cast<int64_t>(seconds * 16000);
  w.samples.resize(static_cast<size_t>(n));
  double f0 = 140.0 + 60.0 * rng.Uniform();
  for (int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 16000.0;
    const double env = 0.55 + 0.45 * std::sin(2.0 * M_PI * 1.3 * t);
    double v = 0.0;
    for (int h = 1; h <= 5; ++h)
      v += std::sin(2.0 * M_PI * f0 * h * t + h) / h;
    w.samples[static_cast<size_t>(i)] =
        0.3 * env * v + 1e-3 * (2.0 * rng.Uniform() - 1.0);
  }
  return w;
}

Waveform AddNoise(const Waveform& w, double snr_db, uint64_t seed) {
  Rng rng(seed);
  Waveform noise;
  noise.sample_rate = w.sample_rate;
  noise.samples.resize(w.samples.size());
  for (auto& s : noise.samples) s = 2.0 * rng.Uniform() - 1.0;
  Waveform mix = MixAtSnr(w, noise, snr_db);
  return mix;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("si_sdr: scale invariance, hand case, cap, loss agreement") {
  Rng rng(91);
  Waveform ref = SpeechLike(1);
  Waveform est = ref;
  for (auto& s : est.samples) s += 0.05 * (2.0 * rng.Uniform() - 1.0);

  const double base = SiSdr(est, ref);
  Waveform est2 = est;
  for (auto& s : est2.samples) s *= 2.0;
  CHECK(std::abs(SiSdr(est2, ref) - base) < 1e-6);

  Waveform scaled = ref;
  for (auto& s : scaled.samples) s *= 2.0;
  CHECK(SiSdr(scaled, ref) == doctest::Approx(kDbCap));

  Waveform a, b;
  a.sample_rate = b.sample_rate = 16000;
  a.samples = {1.0, 1.0};
  b.samples = {1.0, 0.0};
  CHECK(SiSdr(a, b) == doctest::Approx(0.0).epsilon(1e-9));

  // Definition link: si_sdr(est, ref) = -si_sdr_loss(ref, est) when the
  // epsilon terms are negligible.
  CHECK(std::abs(base + SiSdrLoss(ref, est)) < 1e-6);

  // Scale DEPENDENCE of plain SDR on the same pair.
  CHECK(std::abs(Sdr(est2, ref) - Sdr(est, ref)) > 1.0);
}

TEST_CASE("si_sdr improvement identities") {
  Waveform ref = SpeechLike(2);
  Waveform mix = AddNoise(ref, 3.0, 22);
  CHECK(SiSdrImprovement(mix, mix, ref) == doctest::Approx(0.0));
  CHECK(SiSdrImprovement(ref, mix, ref) ==
        doctest::Approx(kDbCap - SiSdr(mix, ref)));
}

TEST_CASE("sdr closed forms") {
  Waveform ref = SpeechLike(3);
  CHECK(Sdr(ref, ref) == doctest::Approx(kDbCap));
  Waveform half = ref;
  for (auto& s : half.samples) s *= 0.5;
  CHECK(Sdr(half, ref) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-9));
  Waveform neg = ref;
  for (auto& s : neg.samples) s *= -1.0;
  CHECK(Sdr(neg, ref) ==
        doctest::Approx(10.0 * std::log10(0.25)).epsilon(1e-9));
}

TEST_CASE("stoi: identity, sign flip, monotonicity under noise") {
  Waveform ref = SpeechLike(4);
  CHECK(Stoi(ref, ref) == doctest::Approx(1.0).epsilon(1e-6));

  Waveform neg = ref;
  for (auto& s : neg.samples) s *= -1.0;
  CHECK(Stoi(neg, ref) == doctest::Approx(1.0).epsilon(1e-6));

  const double clean = Stoi(ref, ref);
  const double s20 = Stoi(AddNoise(ref, 20.0, 7), ref);
  const double s0 = Stoi(AddNoise(ref, 0.0, 7), ref);
  const double sm10 = Stoi(AddNoise(ref, -10.0, 7), ref);
  CHECK(s20 < clean);
  CHECK(s0 < s20);
  CHECK(sm10 < s0);
  CHECK(sm10 >= -1.0);
  CHECK(s20 <= 1.0);

  Waveform blip;
  blip.sample_rate = 16000;
  blip.samples.assign(512, 0.1);
  CHECK_THROWS(Stoi(blip, blip));
}

TEST_CASE("external PESQ adapter: unconfigured, passthrough, failure") {
  TempDir dir("pesq");
  Waveform ref = SpeechLike(5, 1.0);
  WriteAudio(dir.File("ref.wav"), ref);
  WriteAudio(dir.File("est.wav"), ref);

  CHECK(PesqExternal(dir.File("est.wav"), dir.File("ref.wav"), "") ==
        std::nullopt);

  const std::string good = dir.File("good.sh");
  {
    std::ofstream t(good);
    t << "#!/bin/sh\necho 'PESQ MOS: 4.5'\n";
  }
  std::filesystem::permissions(good, std::filesystem::perms::owner_all);
  auto score = PesqExternal(dir.File("est.wav"), dir.File("ref.wav"), good);
  REQUIRE(score.has_value());
  CHECK(*score == doctest::Approx(4.5));

  const std::string bad = dir.File("bad.sh");
  {
    std::ofstream t(bad);
    t << "#!/bin/sh\nexit 3\n";
  }
  std::filesystem::permissions(bad, std::filesystem::perms::owner_all);
  CHECK_THROWS(PesqExternal(dir.File("est.wav"), dir.File("ref.wav"), bad));
}

TEST_CASE("report aggregates are the arithmetic means; files round-trip") {
  TempDir dir("report");
  EvalReport rep;
  for (int i = 0; i < 4; ++i) {
    UtteranceMetrics u;
    u.id = "utt" + std::to_string(i);
    u.si_sdr = i;
    u.si_sdri = i + 0.5;
    u.sdr = 2.0 * i;
    u.stoi = 0.8 + 0.01 * i;
    if (i < 2) u.pesq = 3.0 + i;
    rep.records.push_back(u);
  }
  CHECK(rep.MeanSiSdr() == doctest::Approx(1.5));
  CHECK(rep.MeanSiSdri() == doctest::Approx(2.0));
  CHECK(rep.MeanSdr() == doctest::Approx(3.0));
  CHECK(rep.MeanStoi() == doctest::Approx(0.815));
  REQUIRE(rep.MeanPesq().has_value());
  CHECK(*rep.MeanPesq() == doctest::Approx(3.5));

  rep.WriteJson(dir.File("rep.json"));
  EvalReport back = EvalReport::ReadJson(dir.File("rep.json"));
  REQUIRE(back.records.size() == 4);
  CHECK(back.MeanSiSdr() == doctest::Approx(rep.MeanSiSdr()));
  CHECK(back.records[0].pesq.has_value());
  CHECK_FALSE(back.records[3].pesq.has_value());

  rep.WriteCsv(dir.File("rep.csv"));
  std::ifstream csv(dir.File("rep.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "id,si_sdr,si_sdri,sdr,stoi,pesq");
  int rows = 0;
  std::string line;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
}

}  // TEST_SUITE

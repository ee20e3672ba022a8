// src/metrics.cc

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

#include "avtse/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "avtse/dsp.h"

using nlohmann::json;

namespace avtse {
namespace metrics {

namespace {

double SumSquares(const std::vector<double>& v) {
  double acc = 0.0;
  for (double s : v) acc += s * s;
  return acc;
}

double DotProd(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

double SiSdr(const Waveform& est, const Waveform& ref) {
  if (est.samples.size() != ref.samples.size())
    throw std::invalid_argument("SiSdr: length mismatch");
  const double ypow = SumSquares(ref.samples);
  if (ypow <= 0.0) throw std::invalid_argument("SiSdr: zero reference");
  const double alpha = DotProd(est.samples, ref.samples) / ypow;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < ref.samples.size(); ++i) {
    const double p = alpha * ref.samples[i];
    const double e = est.samples[i] - p;
    num += p * p;
    den += e * e;
  }
  if (den <= 0.0 || num / den >= std::pow(10.0, kDbCap / 10.0)) return kDbCap;
  return std::min(kDbCap, 10.0 * std::log10(num / den));
}

double SiSdrImprovement(const Waveform& est, const Waveform& mix,
                        const Waveform& ref) {
  return SiSdr(est, ref) - SiSdr(mix, ref);
}

double Sdr(const Waveform& est, const Waveform& ref) {
  if (est.samples.size() != ref.samples.size())
    throw std::invalid_argument("Sdr: length mismatch");
  const double num = SumSquares(ref.samples);
  if (num <= 0.0) throw std::invalid_argument("Sdr: zero reference");
  double den = 0.0;
  for (size_t i = 0; i < ref.samples.size(); ++i) {
    const double e = ref.samples[i] - est.samples[i];
    den += e * e;
  }
  if (den <= 0.0 || num / den >= std::pow(10.0, kDbCap / 10.0)) return kDbCap;
  return 10.0 * std::log10(num / den);
}

// ---------------------------------------------------------------------------
// STOI
// ---------------------------------------------------------------------------

namespace {

constexpr int kStoiFs = 10000;
constexpr int64_t kFrame = 256;
constexpr int64_t kHop = 128;
constexpr int64_t kNfft = 512;
constexpr int kBands = 15;
constexpr double kLowestBand = 150.0;
constexpr int64_t kSegFrames = 30;
constexpr double kDynRange = 40.0;
constexpr double kBetaDb = -15.0;

// Keeps frames of the reference within kDynRange dB of its loudest frame;
// both signals are rebuilt by overlap-adding the retained windowed frames.
void RemoveSilentFrames(std::vector<double>& x, std::vector<double>& y) {
  const std::vector<double> w = dsp::HanningWindow(kFrame);
  const int64_t n = static_cast<int64_t>(x.size());
  if (n < kFrame) {
    x.clear();
    y.clear();
    return;
  }
  const int64_t num_frames = (n - kFrame) / kHop + 1;
  std::vector<double> level(static_cast<size_t>(num_frames));
  double peak = -1e300;
  for (int64_t f = 0; f < num_frames; ++f) {
    double acc = 0.0;
    for (int64_t i = 0; i < kFrame; ++i) {
      const double v = x[static_cast<size_t>(f * kHop + i)] *
                       w[static_cast<size_t>(i)];
      acc += v * v;
    }
    level[static_cast<size_t>(f)] =
        20.0 * std::log10(std::sqrt(acc / kFrame) + 1e-20);
    peak = std::max(peak, level[static_cast<size_t>(f)]);
  }
  std::vector<double> xs, ys;
  int64_t count = 0;
  xs.assign(static_cast<size_t>(num_frames * kHop + kFrame), 0.0);
  ys.assign(xs.size(), 0.0);
  for (int64_t f = 0; f < num_frames; ++f) {
    if (level[static_cast<size_t>(f)] < peak - kDynRange) continue;
    for (int64_t i = 0; i < kFrame; ++i) {
      xs[static_cast<size_t>(count * kHop + i)] +=
          x[static_cast<size_t>(f * kHop + i)] * w[static_cast<size_t>(i)];
      ys[static_cast<size_t>(count * kHop + i)] +=
          y[static_cast<size_t>(f * kHop + i)] * w[static_cast<size_t>(i)];
    }
    ++count;
  }
  xs.resize(static_cast<size_t>(count > 0 ? (count - 1) * kHop + kFrame : 0));
  ys.resize(xs.size());
  x = std::move(xs);
  y = std::move(ys);
}

// One-third-octave band edges snapped to DFT bins.
std::vector<std::pair<int64_t, int64_t>> ThirdOctaveBands() {
  const int64_t bins = kNfft / 2 + 1;
  auto nearest_bin = [&](double freq) {
    int64_t best = 0;
    double best_d = 1e300;
    for (int64_t i = 0; i < bins; ++i) {
      const double f = static_cast<double>(i) * kStoiFs / kNfft;
      const double d = std::abs(f - freq);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  std::vector<std::pair<int64_t, int64_t>> bands;
  for (int k = 0; k < kBands; ++k) {
    const double cf = kLowestBand * std::pow(2.0, k / 3.0);
    const double fl = cf * std::pow(2.0, -1.0 / 6.0);
    const double fr = cf * std::pow(2.0, 1.0 / 6.0);
    bands.emplace_back(nearest_bin(fl), nearest_bin(fr));
  }
  return bands;
}

}  // namespace

double Stoi(const Waveform& est, const Waveform& ref) {
  if (est.samples.size() != ref.samples.size())
    throw std::invalid_argument("Stoi: length mismatch");
  if (est.sample_rate != ref.sample_rate)
    throw std::invalid_argument("Stoi: sample rate mismatch");

  // Resample to the 10 kHz analysis rate.
  std::vector<double> x = ref.samples, y = est.samples;
  if (ref.sample_rate != kStoiFs) {
    int64_t up = kStoiFs, down = ref.sample_rate;
    const int64_t g = std::__gcd(up, down);
    up /= g;
    down /= g;
    x = dsp::Resample(x, up, down);
    y = dsp::Resample(y, up, down);
  }

  RemoveSilentFrames(x, y);

  const std::vector<double> w = dsp::HanningWindow(kFrame);
  const Tensor xs = dsp::StftMagnitude(x, w, kHop, kNfft);
  const Tensor ys = dsp::StftMagnitude(y, w, kHop, kNfft);
  const int64_t num_frames = xs.Dim(0);
  if (num_frames < kSegFrames)
    throw std::runtime_error(
        "Stoi: too little active speech after silence removal");

  const auto bands = ThirdOctaveBands();
  const int64_t bins = kNfft / 2 + 1;
  Tensor xb({num_frames, kBands}), yb({num_frames, kBands});
  for (int64_t m = 0; m < num_frames; ++m) {
    for (int j = 0; j < kBands; ++j) {
      double ax = 0.0, ay = 0.0;
      for (int64_t i = bands[static_cast<size_t>(j)].first;
           i < bands[static_cast<size_t>(j)].second; ++i) {
        ax += xs[m * bins + i] * xs[m * bins + i];
        ay += ys[m * bins + i] * ys[m * bins + i];
      }
      xb[m * kBands + j] = std::sqrt(ax);
      yb[m * kBands + j] = std::sqrt(ay);
    }
  }

  const double clip_gain = 1.0 + std::pow(10.0, -kBetaDb / 20.0);
  double d_sum = 0.0;
  int64_t d_count = 0;
  std::vector<double> xseg(kSegFrames), yseg(kSegFrames);
  for (int64_t m = kSegFrames; m <= num_frames; ++m) {
    for (int j = 0; j < kBands; ++j) {
      double nx = 0.0, ny = 0.0;
      for (int64_t i = 0; i < kSegFrames; ++i) {
        xseg[static_cast<size_t>(i)] = xb[(m - kSegFrames + i) * kBands + j];
        yseg[static_cast<size_t>(i)] = yb[(m - kSegFrames + i) * kBands + j];
        nx += xseg[static_cast<size_t>(i)] * xseg[static_cast<size_t>(i)];
        ny += yseg[static_cast<size_t>(i)] * yseg[static_cast<size_t>(i)];
      }
      const double alpha = std::sqrt(nx) / (std::sqrt(ny) + 1e-20);
      double mx = 0.0, my = 0.0;
      for (int64_t i = 0; i < kSegFrames; ++i) {
        yseg[static_cast<size_t>(i)] =
            std::min(alpha * yseg[static_cast<size_t>(i)],
                     xseg[static_cast<size_t>(i)] * clip_gain);
        mx += xseg[static_cast<size_t>(i)];
        my += yseg[static_cast<size_t>(i)];
      }
      mx /= kSegFrames;
      my /= kSegFrames;
      double num = 0.0, dx = 0.0, dy = 0.0;
      for (int64_t i = 0; i < kSegFrames; ++i) {
        const double a = xseg[static_cast<size_t>(i)] - mx;
        const double b = yseg[static_cast<size_t>(i)] - my;
        num += a * b;
        dx += a * a;
        dy += b * b;
      }
      d_sum += num / (std::sqrt(dx * dy) + 1e-20);
      ++d_count;
    }
  }
  return d_sum / static_cast<double>(d_count);
}

// ---------------------------------------------------------------------------
// External PESQ
// ---------------------------------------------------------------------------

std::optional<double> PesqExternal(const std::string& est_path,
                                   const std::string& ref_path,
                                   const std::string& tool_path) {
  if (tool_path.empty()) return std::nullopt;
  const std::string cmd =
      "'" + tool_path + "' '" + ref_path + "' '" + est_path + "' 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("PesqExternal: cannot launch tool");
  std::string output;
  char buf[256];
  while (fgets(buf, sizeof(buf), pipe)) output += buf;
  const int status = pclose(pipe);
  if (status != 0)
    throw std::runtime_error("PesqExternal: tool exited with status " +
                             std::to_string(status));
  std::istringstream ss(output);
  std::string tok, last;
  while (ss >> tok) last = tok;
  try {
    size_t pos = 0;
    const double score = std::stod(last, &pos);
    if (pos != last.size()) throw std::invalid_argument(last);
    return score;
  } catch (const std::exception&) {
    throw std::runtime_error("PesqExternal: no score in tool output");
  }
}

// ---------------------------------------------------------------------------
// EvalReport
// ---------------------------------------------------------------------------

namespace {
double MeanOf(const std::vector<UtteranceMetrics>& recs,
              double UtteranceMetrics::* field) {
  if (recs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : recs) acc += r.*field;
  return acc / static_cast<double>(recs.size());
}
}  // namespace

double EvalReport::MeanSiSdr() const { return MeanOf(records, &UtteranceMetrics::si_sdr); }
double EvalReport::MeanSiSdri() const { return MeanOf(records, &UtteranceMetrics::si_sdri); }
double EvalReport::MeanSdr() const { return MeanOf(records, &UtteranceMetrics::sdr); }
double EvalReport::MeanStoi() const { return MeanOf(records, &UtteranceMetrics::stoi); }

std::optional<double> EvalReport::MeanPesq() const {
  double acc = 0.0;
  int64_t n = 0;
  for (const auto& r : records)
    if (r.pesq) {
      acc += *r.pesq;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return acc / static_cast<double>(n);
}

std::string EvalReport::ToJsonString() const {
  json recs = json::array();
  for (const auto& r : records) {
    json jr;
    jr["id"] = r.id;
    jr["si_sdr"] = r.si_sdr;
    jr["si_sdri"] = r.si_sdri;
    jr["sdr"] = r.sdr;
    jr["stoi"] = r.stoi;
    if (r.pesq) jr["pesq"] = *r.pesq;
    if (!r.pesq_error.empty()) jr["pesq_error"] = r.pesq_error;
    recs.push_back(jr);
  }
  json j;
  j["records"] = recs;
  json agg;
  agg["si_sdr"] = MeanSiSdr();
  agg["si_sdri"] = MeanSiSdri();
  agg["sdr"] = MeanSdr();
  agg["stoi"] = MeanStoi();
  if (auto p = MeanPesq()) agg["pesq"] = *p;
  j["aggregate"] = agg;
  return j.dump(2);
}

EvalReport EvalReport::FromJsonString(const std::string& s) {
  json j = json::parse(s);
  EvalReport rep;
  for (const auto& jr : j.at("records")) {
    UtteranceMetrics r;
    r.id = jr.at("id").get<std::string>();
    r.si_sdr = jr.at("si_sdr").get<double>();
    r.si_sdri = jr.at("si_sdri").get<double>();
    r.sdr = jr.at("sdr").get<double>();
    r.stoi = jr.at("stoi").get<double>();
    if (jr.contains("pesq")) r.pesq = jr.at("pesq").get<double>();
    if (jr.contains("pesq_error"))
      r.pesq_error = jr.at("pesq_error").get<std::string>();
    rep.records.push_back(std::move(r));
  }
  return rep;
}

void EvalReport::WriteJson(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << ToJsonString() << "\n";
}

EvalReport EvalReport::ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJsonString(ss.str());
}

void EvalReport::WriteCsv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "id,si_sdr,si_sdri,sdr,stoi,pesq\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f,%.6f,", r.id.c_str(),
                  r.si_sdr, r.si_sdri, r.sdr, r.stoi);
    out << line;
    if (r.pesq) {
      std::snprintf(line, sizeof(line), "%.6f", *r.pesq);
      out << line;
    }
    out << "\n";
  }
}

}  // namespace metrics
}  // namespace avtse

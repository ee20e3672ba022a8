// include/avtse/metrics.h

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

#ifndef AVTSE_METRICS_H_
#define AVTSE_METRICS_H_

#include <optional>
#include <string>
#include <vector>

#include "avtse/signal_io.h"

namespace avtse {
namespace metrics {

/// Reporting cap (dB) for perfect-reconstruction cases.
constexpr double kDbCap = 60.0;

/// Scale-invariant SDR in dB, capped at kDbCap.
double SiSdr(const Waveform& est, const Waveform& ref);

/// SiSdr(est, ref) - SiSdr(mix, ref).
double SiSdrImprovement(const Waveform& est, const Waveform& mix,
                        const Waveform& ref);

/// Plain (scale-dependent) SNR: 10 log10(||ref||^2 / ||ref - est||^2),
/// capped at kDbCap.
double Sdr(const Waveform& est, const Waveform& ref);

/// Short-time objective intelligibility. Both signals are resampled to
/// 10 kHz; silent reference frames (40 dB below the loudest) are removed;
/// band envelopes over 15 one-third-octave bands (from 150 Hz) are compared
/// with clipped, normalized correlation over 30-frame segments.
/// Throws if fewer than 30 active frames remain.
double Stoi(const Waveform& est, const Waveform& ref);

/// Shells out to an external PESQ-conformant tool:
///   <tool> <ref.wav> <est.wav>
/// must print the score as the last whitespace-separated token on stdout.
/// Returns nullopt when tool_path is empty; throws on tool failure.
std::optional<double> PesqExternal(const std::string& est_path,
                                   const std::string& ref_path,
                                   const std::string& tool_path);

struct UtteranceMetrics {
  std::string id;
  double si_sdr = 0.0;
  double si_sdri = 0.0;
  double sdr = 0.0;
  double stoi = 0.0;
  std::optional<double> pesq;
  std::string pesq_error;  // non-empty when the external tool failed
};

struct EvalReport {
  std::vector<UtteranceMetrics> records;

  double MeanSiSdr() const;
  double MeanSiSdri() const;
  double MeanSdr() const;
  double MeanStoi() const;
  std::optional<double> MeanPesq() const;

  std::string ToJsonString() const;
  static EvalReport FromJsonString(const std::string& s);
  void WriteJson(const std::string& path) const;
  static EvalReport ReadJson(const std::string& path);
  void WriteCsv(const std::string& path) const;
};

}  // namespace metrics
}  // namespace avtse

#endif  // AVTSE_METRICS_H_

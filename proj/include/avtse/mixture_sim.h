// include/avtse/mixture_sim.h

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

#ifndef AVTSE_MIXTURE_SIM_H_
#define AVTSE_MIXTURE_SIM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "avtse/signal_io.h"

namespace avtse {

enum class Split { kTrain, kValid, kTest };

std::string SplitName(Split s);
Split SplitFromName(const std::string& name);

/// One simulated two-speaker mixture. mask_start_s is -1 (and mask_len_s 0)
/// when the entry carries no zero-masked segment.
struct ManifestEntry {
  std::string target_audio;
  std::string interferer_audio;
  std::string target_visual;
  double snr_db = 0.0;
  double crop_start_s = 0.0;
  double crop_len_s = 4.0;
  double mask_start_s = -1.0;
  double mask_len_s = 0.0;
  Split split = Split::kTrain;

  bool HasMask() const { return mask_len_s > 0.0; }
};

struct SimConfig {
  uint64_t seed = 0;
  int64_t train_count = 0;
  int64_t valid_count = 0;
  int64_t test_count = 0;
  double snr_lo_db = -10.0;  // SNR draws stay within [-10, 10] dB
  double snr_hi_db = 10.0;
  int mask_duration_ms = 0;  // one of {0,100,200,300,400,500,600}

  void Validate() const;
};

/// Train and valid entries are clipped to exactly this many seconds; test
/// entries draw a length in [4, 6] s.
constexpr double kTrainCropSeconds = 4.0;

/// target + g * interferer with g = sqrt(P_t/P_i) * 10^(-snr_db/20), so the
/// measured SNR of target against the scaled interferer equals snr_db.
Waveform MixAtSnr(const Waveform& target, const Waveform& interferer,
                  double snr_db);

/// Measured 10*log10(P_target / P_interferer); the oracle for MixAtSnr.
double MeasureSnrDb(const Waveform& target, const Waveform& interferer);

/// Exactly round(len_s*rate) samples starting at round(start_s*rate),
/// zero-padded at the tail when the source runs out.
Waveform CropOrPad(const Waveform& w, double start_s, double len_s);

/// Frame-domain crop of a feature sequence covering the same time window.
FeatureSequence CropFeatures(const FeatureSequence& f, double start_s,
                             double len_s);

/// Samples in [round(start_s*rate), round((start_s+len_s)*rate)) become
/// exactly 0; everything else is bit-identical.
Waveform ApplyZeroMask(const Waveform& w, double start_s, double len_s);

/// Deterministic manifest over a corpus directory laid out as
/// <corpus>/<speaker>/<utt>.wav (+ .feat visual features alongside).
/// Test entries draw from held-out speakers; train/valid share the rest.
/// When cfg.mask_duration_ms > 0, train and valid entries get a uniformly
/// placed mask interval; test entries stay intact.
std::vector<ManifestEntry> BuildManifest(const std::string& corpus_dir,
                                         const SimConfig& cfg);

void WriteManifest(const std::string& path,
                   const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> ReadManifest(const std::string& path);
std::vector<ManifestEntry> FilterSplit(const std::vector<ManifestEntry>& all,
                                       Split split);

/// Synthesizes a toy audio-visual corpus: per utterance a 6 s harmonic
/// signal with a speaker-specific fundamental and a random on/off envelope,
/// plus 25 fps visual features whose channels encode that envelope.
struct SynthConfig {
  int n_speakers = 4;
  int utts_per_speaker = 2;
  uint64_t seed = 0;
  int visual_channels = 16;
  double duration_s = 6.0;
  int sample_rate = 16000;
  double video_fps = 25.0;
};
void SynthCorpus(const std::string& out_dir, const SynthConfig& cfg);

/// A rendered training/eval item: mixture, clean target, visual features.
struct RenderedExample {
  Waveform mixture;          // intact mixture (mask not applied)
  Waveform mixture_masked;   // mixture with the entry's zero mask (if any)
  Waveform target;           // clean cropped target
  FeatureSequence visual;    // cropped raw visual features
};
RenderedExample RenderEntry(const ManifestEntry& e);

}  // namespace avtse

#endif  // AVTSE_MIXTURE_SIM_H_

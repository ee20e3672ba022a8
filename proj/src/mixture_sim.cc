// src/mixture_sim.cc

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

#include "avtse/mixture_sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "avtse/rng.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace avtse {

std::string SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "train";
}

Split SplitFromName(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split: " + name);
}

static double SumSquares(const std::vector<double>& v) {
  double acc = 0.0;
  for (double s : v) acc += s * s;
  return acc;
}

Waveform MixAtSnr(const Waveform& target, const Waveform& interferer,
                  double snr_db) {
  if (target.samples.size() != interferer.samples.size())
    throw std::invalid_argument("MixAtSnr: length mismatch");
  if (target.sample_rate != interferer.sample_rate)
    throw std::invalid_argument("MixAtSnr: sample rate mismatch");
  const double pt = SumSquares(target.samples);
  const double pi = SumSquares(interferer.samples);
  if (pt <= 0.0 || pi <= 0.0)
    throw std::invalid_argument("MixAtSnr: zero-power input");
  const double g = std::sqrt(pt / pi) * std::pow(10.0, -snr_db / 20.0);
  Waveform out;
  out.sample_rate = target.sample_rate;
  out.samples.resize(target.samples.size());
  for (size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = target.samples[i] + g * interferer.samples[i];
  return out;
}

double MeasureSnrDb(const Waveform& target, const Waveform& interferer) {
  const double pt = SumSquares(target.samples);
  const double pi = SumSquares(interferer.samples);
  if (pt <= 0.0 || pi <= 0.0)
    throw std::invalid_argument("MeasureSnrDb: zero-power input");
  return 10.0 * std::log10(pt / pi);
}

Waveform CropOrPad(const Waveform& w, double start_s, double len_s) {
  if (start_s < 0.0) throw std::invalid_argument("CropOrPad: negative start");
  if (len_s <= 0.0)
    throw std::invalid_argument("CropOrPad: non-positive length");
  const int64_t start = std::llround(start_s * w.sample_rate);
  const int64_t len = std::llround(len_s * w.sample_rate);
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(static_cast<size_t>(len), 0.0);
  const int64_t n = w.NumSamples();
  for (int64_t i = 0; i < len; ++i) {
    const int64_t src = start + i;
    if (src < n) out.samples[static_cast<size_t>(i)] = w.samples[static_cast<size_t>(src)];
  }
  return out;
}

FeatureSequence CropFeatures(const FeatureSequence& f, double start_s,
                             double len_s) {
  if (start_s < 0.0 || len_s <= 0.0)
    throw std::invalid_argument("CropFeatures: bad window");
  const int64_t start = std::llround(start_s * f.frame_rate);
  const int64_t len = std::llround(len_s * f.frame_rate);
  const int64_t C = f.NumChannels();
  FeatureSequence out;
  out.frame_rate = f.frame_rate;
  out.data = Tensor({len, C});
  for (int64_t t = 0; t < len; ++t) {
    const int64_t src = start + t;
    if (src >= f.NumFrames()) break;
    for (int64_t c = 0; c < C; ++c) out.data[t * C + c] = f.data[src * C + c];
  }
  return out;
}

Waveform ApplyZeroMask(const Waveform& w, double start_s, double len_s) {
  if (len_s < 0.0) throw std::invalid_argument("ApplyZeroMask: negative length");
  const int64_t lo = std::llround(start_s * w.sample_rate);
  const int64_t hi = std::llround((start_s + len_s) * w.sample_rate);
  if (lo < 0 || hi > w.NumSamples() || lo > hi)
    throw std::out_of_range("ApplyZeroMask: interval out of range");
  Waveform out = w;
  for (int64_t i = lo; i < hi; ++i) out.samples[static_cast<size_t>(i)] = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

namespace {

struct SpeakerFiles {
  std::string name;
  std::vector<std::string> wavs;  // absolute-ish paths as found
};

std::vector<SpeakerFiles> ScanCorpus(const std::string& corpus_dir) {
  if (!fs::is_directory(corpus_dir))
    throw std::runtime_error("corpus directory not found: " + corpus_dir);
  std::vector<SpeakerFiles> speakers;
  std::vector<std::string> dirs;
  for (const auto& e : fs::directory_iterator(corpus_dir))
    if (e.is_directory()) dirs.push_back(e.path().filename().string());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    SpeakerFiles sf;
    sf.name = d;
    for (const auto& e : fs::directory_iterator(fs::path(corpus_dir) / d))
      if (e.is_regular_file() && e.path().extension() == ".wav")
        sf.wavs.push_back(e.path().string());
    std::sort(sf.wavs.begin(), sf.wavs.end());
    if (!sf.wavs.empty()) speakers.push_back(std::move(sf));
  }
  if (speakers.empty())
    throw std::runtime_error("empty corpus: " + corpus_dir);
  return speakers;
}

std::string VisualPathFor(const std::string& wav_path) {
  fs::path p(wav_path);
  p.replace_extension(".feat");
  return p.string();
}

}  // namespace

void SimConfig::Validate() const {
  if (train_count < 0 || valid_count < 0 || test_count < 0)
    throw std::invalid_argument("SimConfig: negative counts");
  if (snr_lo_db > snr_hi_db)
    throw std::invalid_argument("SimConfig: snr range inverted");
  if (snr_lo_db < -10.0 || snr_hi_db > 10.0)
    throw std::invalid_argument("SimConfig: SNR range must lie in [-10, 10] dB");
  if (mask_duration_ms < 0 || mask_duration_ms > 600 ||
      mask_duration_ms % 100 != 0)
    throw std::invalid_argument(
        "SimConfig: mask duration must be one of 0,100,...,600 ms");
}

std::vector<ManifestEntry> BuildManifest(const std::string& corpus_dir,
                                         const SimConfig& cfg) {
  cfg.Validate();
  const std::vector<SpeakerFiles> speakers = ScanCorpus(corpus_dir);
  const int64_t n_spk = static_cast<int64_t>(speakers.size());
  if (n_spk < 2)
    throw std::runtime_error("need at least 2 speakers, found " +
                             std::to_string(n_spk));

  // Held-out speakers for the test split come from the tail of the sorted
  // speaker list; train/valid share the head.
  int64_t n_test_spk = 0;
  if (cfg.test_count > 0) {
    n_test_spk = std::max<int64_t>(2, n_spk / 4);
    if (n_spk - n_test_spk < 2)
      throw std::runtime_error(
          "corpus too small to hold out unseen test speakers (need >= 4)");
  }
  std::vector<int64_t> head_pool, test_pool;
  for (int64_t i = 0; i < n_spk - n_test_spk; ++i) head_pool.push_back(i);
  for (int64_t i = n_spk - n_test_spk; i < n_spk; ++i) test_pool.push_back(i);

  Rng rng(cfg.seed);
  std::vector<ManifestEntry> entries;
  auto emit = [&](Split split, int64_t count) {
    const std::vector<int64_t>& pool =
        split == Split::kTest ? test_pool : head_pool;
    for (int64_t i = 0; i < count; ++i) {
      const int64_t ti = pool[rng.UniformInt(static_cast<int64_t>(pool.size()))];
      int64_t ii = ti;
      while (ii == ti)
        ii = pool[rng.UniformInt(static_cast<int64_t>(pool.size()))];
      const SpeakerFiles& ts = speakers[static_cast<size_t>(ti)];
      const SpeakerFiles& is = speakers[static_cast<size_t>(ii)];
      ManifestEntry e;
      e.split = split;
      e.target_audio =
          ts.wavs[static_cast<size_t>(rng.UniformInt(static_cast<int64_t>(ts.wavs.size())))];
      e.interferer_audio =
          is.wavs[static_cast<size_t>(rng.UniformInt(static_cast<int64_t>(is.wavs.size())))];
      e.target_visual = VisualPathFor(e.target_audio);
      e.snr_db = rng.Uniform(cfg.snr_lo_db, cfg.snr_hi_db);
      e.crop_len_s = split == Split::kTest ? rng.Uniform(4.0, 6.0)
                                           : kTrainCropSeconds;
      const WavInfo info = ReadAudioInfo(e.target_audio);
      const double dur =
          static_cast<double>(info.num_samples) / info.sample_rate;
      const double max_start = std::max(0.0, dur - e.crop_len_s);
      e.crop_start_s = rng.Uniform(0.0, max_start);
      if (cfg.mask_duration_ms > 0 && split != Split::kTest) {
        e.mask_len_s = cfg.mask_duration_ms / 1000.0;
        e.mask_start_s = rng.Uniform(0.0, e.crop_len_s - e.mask_len_s);
      }
      entries.push_back(std::move(e));
    }
  };
  emit(Split::kTrain, cfg.train_count);
  emit(Split::kValid, cfg.valid_count);
  emit(Split::kTest, cfg.test_count);
  return entries;
}

static json EntryToJson(const ManifestEntry& e) {
  json j;
  j["target_audio"] = e.target_audio;
  j["interferer_audio"] = e.interferer_audio;
  j["target_visual"] = e.target_visual;
  j["snr_db"] = e.snr_db;
  j["crop_start_s"] = e.crop_start_s;
  j["crop_len_s"] = e.crop_len_s;
  j["mask_start_s"] = e.mask_start_s;
  j["mask_len_s"] = e.mask_len_s;
  j["split"] = SplitName(e.split);
  return j;
}

void WriteManifest(const std::string& path,
                   const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& e : entries) out << EntryToJson(e).dump() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ManifestEntry e;
    e.target_audio = j.at("target_audio").get<std::string>();
    e.interferer_audio = j.at("interferer_audio").get<std::string>();
    e.target_visual = j.at("target_visual").get<std::string>();
    e.snr_db = j.at("snr_db").get<double>();
    e.crop_start_s = j.at("crop_start_s").get<double>();
    e.crop_len_s = j.at("crop_len_s").get<double>();
    e.mask_start_s = j.at("mask_start_s").get<double>();
    e.mask_len_s = j.at("mask_len_s").get<double>();
    e.split = SplitFromName(j.at("split").get<std::string>());
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> FilterSplit(const std::vector<ManifestEntry>& all,
                                       Split split) {
  std::vector<ManifestEntry> out;
  for (const auto& e : all)
    if (e.split == split) out.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

namespace {

double SpeakerFundamental(int speaker) {
  // Distinct pitch classes three semitones apart, cycling with an offset so
  // larger corpora stay separable by spectral peak.
  const int k = speaker % 8;
  const int cycle = speaker / 8;
  return 110.0 * std::pow(2.0, 3.0 * k / 12.0) + 11.0 * cycle;
}

}  // namespace

void SynthCorpus(const std::string& out_dir, const SynthConfig& cfg) {
  if (cfg.n_speakers < 2)
    throw std::invalid_argument("SynthCorpus: need at least 2 speakers");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir))
    throw std::runtime_error("cannot create corpus directory: " + out_dir);

  const int64_t n = std::llround(cfg.duration_s * cfg.sample_rate);
  const int64_t frames = std::llround(cfg.duration_s * cfg.video_fps);
  const int64_t spf = std::llround(cfg.sample_rate / cfg.video_fps);

  for (int s = 0; s < cfg.n_speakers; ++s) {
    const double f0 = SpeakerFundamental(s);
    char spk_name[32];
    std::snprintf(spk_name, sizeof(spk_name), "spk%03d", s);
    const fs::path spk_dir = fs::path(out_dir) / spk_name;
    fs::create_directories(spk_dir, ec);
    for (int u = 0; u < cfg.utts_per_speaker; ++u) {
      // Per-utterance stream keyed by (seed, speaker, utt) so corpora are
      // reproducible regardless of generation order.
      Rng rng(cfg.seed * 1000003ull + static_cast<uint64_t>(s) * 1009ull +
              static_cast<uint64_t>(u));

      // Random on/off amplitude envelope with smooth 10 ms edges. Duty is
      // kept under half so two independent speakers rarely overlap, which
      // is what makes the visual gating cue strong.
      std::vector<double> env(static_cast<size_t>(n), 0.0);
      const int64_t ramp = cfg.sample_rate / 100;
      int64_t pos = rng.Uniform() < 0.5
                        ? 0
                        : std::llround(rng.Uniform(0.1, 0.5) * cfg.sample_rate);
      while (pos < n) {
        const int64_t seg =
            std::llround(rng.Uniform(0.2, 0.45) * cfg.sample_rate);
        const double amp = rng.Uniform(0.7, 1.0);
        const int64_t end = std::min(n, pos + seg);
        for (int64_t i = pos; i < end; ++i) {
          double a = amp;
          if (i - pos < ramp)
            a *= 0.5 * (1.0 - std::cos(M_PI * (i - pos) / ramp));
          if (end - 1 - i < ramp)
            a *= 0.5 * (1.0 - std::cos(M_PI * (end - 1 - i) / ramp));
          env[static_cast<size_t>(i)] = a;
        }
        pos = end + std::llround(rng.Uniform(0.25, 0.6) * cfg.sample_rate);
      }

      // Harmonic comb under the envelope plus a small noise floor; the
      // floor keeps natural pauses from being exact zero runs, which the
      // masked-frame detector must treat as ordinary audio.
      std::vector<double> phases;
      const int n_partials = 5;
      for (int h = 0; h < n_partials; ++h)
        phases.push_back(rng.Uniform(0.0, 2.0 * M_PI));
      Waveform w;
      w.sample_rate = cfg.sample_rate;
      w.samples.assign(static_cast<size_t>(n), 0.0);
      double peak = 1e-9;
      for (int64_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate;
        double v = 0.0;
        for (int h = 1; h <= n_partials; ++h) {
          const double f = f0 * h;
          if (f > 3500.0) break;
          v += std::sin(2.0 * M_PI * f * t + phases[static_cast<size_t>(h - 1)]) / h;
        }
        const double sample = v * env[static_cast<size_t>(i)];
        w.samples[static_cast<size_t>(i)] = sample;
        peak = std::max(peak, std::abs(sample));
      }
      const double scale = 0.7 / peak;
      for (int64_t i = 0; i < n; ++i) {
        w.samples[static_cast<size_t>(i)] =
            w.samples[static_cast<size_t>(i)] * scale +
            1e-3 * (2.0 * rng.Uniform() - 1.0);
      }

      // Visual features: per-frame envelope level and its derivative spread
      // over channels through fixed bases. Values are float32-quantized so a
      // disk round-trip is bit-exact.
      FeatureSequence vis;
      vis.frame_rate = cfg.video_fps;
      vis.data = Tensor({frames, cfg.visual_channels});
      double prev = 0.0;
      for (int64_t t = 0; t < frames; ++t) {
        double acc = 0.0;
        const int64_t lo = t * spf;
        const int64_t hi = std::min(n, lo + spf);
        for (int64_t i = lo; i < hi; ++i) acc += env[static_cast<size_t>(i)];
        const double level = hi > lo ? acc / static_cast<double>(hi - lo) : 0.0;
        const double delta = level - prev;
        prev = level;
        for (int c = 0; c < cfg.visual_channels; ++c) {
          const double basis_a = std::sin(0.7 * (c + 1));
          const double basis_b = std::cos(1.3 * (c + 1));
          vis.data[t * cfg.visual_channels + c] = static_cast<double>(
              static_cast<float>(basis_a * level + basis_b * delta));
        }
      }

      char utt_name[32];
      std::snprintf(utt_name, sizeof(utt_name), "utt%03d", u);
      WriteAudio((spk_dir / (std::string(utt_name) + ".wav")).string(), w);
      WriteFeatures((spk_dir / (std::string(utt_name) + ".feat")).string(),
                    vis);
    }
  }
}

RenderedExample RenderEntry(const ManifestEntry& e) {
  const Waveform target_full = ReadAudio(e.target_audio);
  const Waveform interferer_full = ReadAudio(e.interferer_audio);
  const FeatureSequence visual_full = ReadFeatures(e.target_visual);
  RenderedExample out;
  out.target = CropOrPad(target_full, e.crop_start_s, e.crop_len_s);
  Waveform interferer = CropOrPad(interferer_full, e.crop_start_s, e.crop_len_s);
  out.mixture = MixAtSnr(out.target, interferer, e.snr_db);
  out.mixture_masked = e.HasMask()
                           ? ApplyZeroMask(out.mixture, e.mask_start_s, e.mask_len_s)
                           : out.mixture;
  out.visual = CropFeatures(visual_full, e.crop_start_s, e.crop_len_s);
  return out;
}

}  // namespace avtse

// src/train_eval.cc

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

#include "avtse/train_eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "avtse/checkpoint.h"
#include "avtse/rng.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace avtse {

StageConfig StageConfig::Stage1Defaults() {
  StageConfig c;
  c.stage = 1;
  c.epochs = 150;
  c.weights = LossWeights{1.0, 0.0, 0.0};
  return c;
}

StageConfig StageConfig::Stage2Defaults() {
  StageConfig c;
  c.stage = 2;
  c.epochs = 30;
  c.mask_duration_ms = 300;
  c.weights = LossWeights{1.0, 5.0, 1.0};
  return c;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

AdamOptimizer::AdamOptimizer(std::vector<Parameter*> params, double lr,
                             double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  slots_.reserve(params_.size());
  for (Parameter* p : params_)
    slots_.push_back({Tensor(p->value.Shape()), Tensor(p->value.Shape())});
}

void AdamOptimizer::ScaleGrads(double factor) {
  for (Parameter* p : params_)
    for (int64_t i = 0; i < p->grad.NumEl(); ++i) p->grad[i] *= factor;
}

double AdamOptimizer::GradNorm() const {
  double acc = 0.0;
  for (const Parameter* p : params_)
    for (int64_t i = 0; i < p->grad.NumEl(); ++i)
      acc += p->grad[i] * p->grad[i];
  return std::sqrt(acc);
}

void AdamOptimizer::ClipGradNorm(double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = GradNorm();
  if (norm > max_norm) ScaleGrads(max_norm / norm);
}

void AdamOptimizer::Step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Parameter* p = params_[k];
    Slot& s = slots_[k];
    for (int64_t i = 0; i < p->grad.NumEl(); ++i) {
      const double g = p->grad[i];
      s.m[i] = b1_ * s.m[i] + (1.0 - b1_) * g;
      s.v[i] = b2_ * s.v[i] + (1.0 - b2_) * g * g;
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      p->value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void AdamOptimizer::ZeroGrads() {
  for (Parameter* p : params_) p->grad.SetZero();
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

Waveform TrimTo(const Waveform& w, int64_t n) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.begin(), w.samples.begin() + n);
  return out;
}

// Per-item loss graph; returns the scalar loss value after backward.
double ItemLossBackward(const AvtseModel& model, const RenderedExample& ex,
                        const StageConfig& cfg) {
  Graph g;
  Value y = g.Input(WaveformToTensor(ex.target));
  Value v = g.Input(ex.visual.data);
  Value loss;
  if (cfg.stage == 1) {
    Value x = g.Input(WaveformToTensor(ex.mixture));
    AvtseModel::ExtractValues res = model.ExtractG(g, x, v);
    loss = SiSdrLossG(g, y, res.s_hat);
  } else {
    Value x = g.Input(WaveformToTensor(ex.mixture_masked));
    AvtseModel::Stage2Values res =
        model.ForwardStage2G(g, x, v, cfg.detect_threshold_samples);
    Value y_emb = model.EncodeReferenceG(g, y);
    loss = TotalLossG(g, y, res.s_hat, res.x_hat_r, y_emb, res.mask,
                      cfg.weights);
  }
  g.Backward(loss);
  return g.Scalar(loss);
}

double ValidationSiSdr(const AvtseModel& model,
                       const std::vector<ManifestEntry>& valid,
                       const StageConfig& cfg) {
  double acc = 0.0;
  for (const ManifestEntry& e : valid) {
    RenderedExample ex = RenderEntry(e);
    Waveform est;
    if (cfg.stage == 1) {
      est = model.Extract(ex.mixture, ex.visual).s_hat;
    } else {
      est = model
                .ForwardStage2(ex.mixture_masked, ex.visual,
                               cfg.detect_threshold_samples)
                .s_hat;
    }
    const int64_t n = std::min(est.NumSamples(), ex.target.NumSamples());
    acc += metrics::SiSdr(TrimTo(est, n), TrimTo(ex.target, n));
  }
  return acc / static_cast<double>(valid.size());
}

RunRecord TrainLoop(AvtseModel& model,
                    const std::vector<ManifestEntry>& manifest,
                    const StageConfig& cfg, const std::string& run_dir) {
  const std::vector<ManifestEntry> train = FilterSplit(manifest, Split::kTrain);
  const std::vector<ManifestEntry> valid = FilterSplit(manifest, Split::kValid);
  if (train.empty()) throw std::runtime_error("training manifest is empty");
  if (cfg.stage == 2) {
    const double want = cfg.mask_duration_ms / 1000.0;
    for (const ManifestEntry& e : train)
      if (!e.HasMask() || std::abs(e.mask_len_s - want) > 1e-9)
        throw std::runtime_error(
            "mask-duration mismatch between stage config and manifest");
  }

  if (!run_dir.empty()) {
    fs::create_directories(run_dir);
    std::ofstream cfg_out(fs::path(run_dir) / "config.json");
    json jc;
    jc["stage"] = cfg.stage;
    jc["epochs"] = cfg.epochs;
    jc["learning_rate"] = cfg.learning_rate;
    jc["batch_size"] = cfg.batch_size;
    jc["mask_duration_ms"] = cfg.mask_duration_ms;
    jc["grad_clip_norm"] = cfg.grad_clip_norm;
    jc["seed"] = cfg.seed;
    jc["max_steps"] = cfg.max_steps;
    jc["model"] = json::parse(model.Config().ToJsonString());
    cfg_out << jc.dump(2) << "\n";
  }

  // Rendered examples are cached for small corpora; larger ones re-render.
  std::vector<RenderedExample> cache;
  const bool use_cache = train.size() <= 256;
  if (use_cache) {
    cache.reserve(train.size());
    for (const ManifestEntry& e : train) cache.push_back(RenderEntry(e));
  }

  AdamOptimizer opt(model.Params(), cfg.learning_rate);
  Rng rng(cfg.seed);
  RunRecord record;
  int64_t steps = 0;
  bool stop = false;

  for (int64_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int64_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int64_t>(i);
    for (int64_t i = static_cast<int64_t>(order.size()) - 1; i > 0; --i)
      std::swap(order[static_cast<size_t>(i)],
                order[static_cast<size_t>(rng.UniformInt(i + 1))]);

    double loss_acc = 0.0;
    int64_t loss_count = 0;
    for (size_t pos = 0; pos < order.size() && !stop;
         pos += static_cast<size_t>(cfg.batch_size)) {
      const size_t end =
          std::min(order.size(), pos + static_cast<size_t>(cfg.batch_size));
      opt.ZeroGrads();
      double batch_loss = 0.0;
      for (size_t i = pos; i < end; ++i) {
        const int64_t idx = order[i];
        RenderedExample scratch;
        const RenderedExample* ex;
        if (use_cache) {
          ex = &cache[static_cast<size_t>(idx)];
        } else {
          scratch = RenderEntry(train[static_cast<size_t>(idx)]);
          ex = &scratch;
        }
        batch_loss += ItemLossBackward(model, *ex, cfg);
      }
      const double n_items = static_cast<double>(end - pos);
      batch_loss /= n_items;
      if (!std::isfinite(batch_loss))
        throw std::runtime_error(
            "training diverged: non-finite loss at step " +
            std::to_string(steps));
      opt.ScaleGrads(1.0 / n_items);
      opt.ClipGradNorm(cfg.grad_clip_norm);
      opt.Step();
      loss_acc += batch_loss;
      ++loss_count;
      ++steps;
      if (cfg.max_steps > 0 && steps >= cfg.max_steps) stop = true;
    }

    EpochRecord er;
    er.epoch = epoch;
    er.train_loss = loss_count ? loss_acc / loss_count : 0.0;
    if (!valid.empty()) {
      er.valid_si_sdr = ValidationSiSdr(model, valid, cfg);
      er.has_valid = true;
    }
    er.wall_s = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();

    std::string ckpt_path;
    if (!run_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof(name), "epoch_%04lld.ckpt",
                    static_cast<long long>(epoch));
      ckpt_path = (fs::path(run_dir) / name).string();
      SaveCheckpoint(ckpt_path, model, cfg.stage);
    }
    const double score = er.has_valid ? er.valid_si_sdr : -er.train_loss;
    if (record.best_epoch < 0 || score > record.best_valid_si_sdr) {
      record.best_epoch = epoch;
      record.best_valid_si_sdr = score;
      record.best_checkpoint = ckpt_path;
      er.is_best = true;
      for (auto& prev : record.epochs) prev.is_best = false;
    }
    record.epochs.push_back(er);
  }
  record.total_steps = steps;

  if (!run_dir.empty()) {
    WriteRunRecord((fs::path(run_dir) / "record.jsonl").string(), record);
    std::ofstream best(fs::path(run_dir) / "best.json");
    json jb;
    jb["best_epoch"] = record.best_epoch;
    jb["best_valid_si_sdr"] = record.best_valid_si_sdr;
    jb["best_checkpoint"] = record.best_checkpoint;
    best << jb.dump(2) << "\n";
  }
  return record;
}

}  // namespace

RunRecord TrainStage1(AvtseModel& model,
                      const std::vector<ManifestEntry>& manifest,
                      const StageConfig& cfg, const std::string& run_dir) {
  StageConfig c = cfg;
  c.stage = 1;
  c.weights.beta = 0.0;
  c.weights.gamma = 0.0;
  return TrainLoop(model, manifest, c, run_dir);
}

RunRecord TrainStage2(AvtseModel& model,
                      const std::vector<ManifestEntry>& manifest,
                      const StageConfig& cfg, const std::string& run_dir) {
  StageConfig c = cfg;
  c.stage = 2;
  return TrainLoop(model, manifest, c, run_dir);
}

std::pair<AvtseModel, RunRecord> TrainStage2FromCheckpoint(
    const std::string& stage1_ckpt, const std::vector<ManifestEntry>& manifest,
    const StageConfig& cfg, const std::string& run_dir) {
  AvtseModel model = LoadCheckpoint(stage1_ckpt);
  // Everything is fine-tuned from stage one; the recovery block alone is
  // trained from scratch.
  model.ReinitGroup("mar_block", cfg.seed + 1);
  RunRecord rec = TrainStage2(model, manifest, cfg, run_dir);
  return {std::move(model), std::move(rec)};
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

metrics::EvalReport Evaluate(const AvtseModel& model,
                             const std::vector<ManifestEntry>& entries,
                             const EvalOptions& opt) {
  metrics::EvalReport report;
  if (!opt.dump_dir.empty()) fs::create_directories(opt.dump_dir);
  int64_t index = 0;
  for (const ManifestEntry& e : entries) {
    RenderedExample ex = RenderEntry(e);
    const Waveform& input = ex.mixture_masked;
    Waveform est;
    if (opt.path == EvalPath::kMarInPath) {
      est = model.ForwardStage2(input, ex.visual, opt.threshold_samples).s_hat;
    } else {
      est = model.Extract(input, ex.visual).s_hat;
    }
    const int64_t n = std::min({est.NumSamples(), ex.target.NumSamples(),
                                input.NumSamples()});
    const Waveform est_t = TrimTo(est, n);
    const Waveform ref_t = TrimTo(ex.target, n);
    const Waveform mix_t = TrimTo(input, n);

    metrics::UtteranceMetrics um;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05lld", static_cast<long long>(index));
    um.id = id;
    um.si_sdr = metrics::SiSdr(est_t, ref_t);
    um.si_sdri = um.si_sdr - metrics::SiSdr(mix_t, ref_t);
    um.sdr = metrics::Sdr(est_t, ref_t);
    um.stoi = metrics::Stoi(est_t, ref_t);

    if (!opt.dump_dir.empty() || !opt.pesq_tool.empty()) {
      const fs::path dir =
          opt.dump_dir.empty() ? fs::temp_directory_path() : fs::path(opt.dump_dir);
      const std::string est_path = (dir / (um.id + std::string("_est.wav"))).string();
      const std::string ref_path = (dir / (um.id + std::string("_ref.wav"))).string();
      const std::string mix_path = (dir / (um.id + std::string("_mix.wav"))).string();
      WriteAudio(est_path, est_t);
      WriteAudio(ref_path, ref_t);
      WriteAudio(mix_path, mix_t);
      if (!opt.pesq_tool.empty()) {
        try {
          um.pesq = metrics::PesqExternal(est_path, ref_path, opt.pesq_tool);
        } catch (const std::exception& err) {
          um.pesq_error = err.what();
        }
      }
      if (opt.dump_dir.empty()) {
        fs::remove(est_path);
        fs::remove(ref_path);
        fs::remove(mix_path);
      }
    }
    report.records.push_back(std::move(um));
    ++index;
  }
  return report;
}

double MeanSiSdrImprovement(const AvtseModel& model,
                            const std::vector<ManifestEntry>& entries,
                            EvalPath path) {
  if (entries.empty()) throw std::invalid_argument("no entries");
  double acc = 0.0;
  for (const ManifestEntry& e : entries) {
    RenderedExample ex = RenderEntry(e);
    const Waveform& input = ex.mixture_masked;
    Waveform est = path == EvalPath::kMarInPath
                       ? model.ForwardStage2(input, ex.visual).s_hat
                       : model.Extract(input, ex.visual).s_hat;
    const int64_t n = std::min({est.NumSamples(), ex.target.NumSamples(),
                                input.NumSamples()});
    acc += metrics::SiSdrImprovement(TrimTo(est, n), TrimTo(input, n),
                                     TrimTo(ex.target, n));
  }
  return acc / static_cast<double>(entries.size());
}

double MeanRecoverLoss(const AvtseModel& model,
                       const std::vector<ManifestEntry>& entries,
                       int64_t threshold_samples) {
  double acc = 0.0;
  int64_t count = 0;
  for (const ManifestEntry& e : entries) {
    if (!e.HasMask()) continue;
    RenderedExample ex = RenderEntry(e);
    AvtseModel::Stage2Output out =
        model.ForwardStage2(ex.mixture_masked, ex.visual, threshold_samples);
    FeatureSequence y_emb = model.SpeechEncode(ex.target).first;
    auto [recover, tse] = MaskedMseLosses(out.x_hat_r, y_emb, out.mask);
    (void)tse;
    acc += recover;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no masked entries");
  return acc / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

std::string SweepReport::ToJsonString() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    json jr;
    jr["mask_ms"] = r.mask_ms;
    jr["si_sdr"] = r.si_sdr;
    jr["si_sdri"] = r.si_sdri;
    rows_j.push_back(jr);
  }
  json j;
  j["rows"] = rows_j;
  return j.dump(2);
}

SweepReport SweepReport::FromJsonString(const std::string& s) {
  json j = json::parse(s);
  SweepReport rep;
  for (const auto& jr : j.at("rows")) {
    SweepRow r;
    r.mask_ms = jr.at("mask_ms").get<int>();
    r.si_sdr = jr.at("si_sdr").get<double>();
    r.si_sdri = jr.at("si_sdri").get<double>();
    rep.rows.push_back(r);
  }
  return rep;
}

void SweepReport::WriteJson(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << ToJsonString() << "\n";
}

SweepReport SweepReport::ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep report: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJsonString(ss.str());
}

SweepReport SweepMaskDuration(const std::string& corpus_dir,
                              const SimConfig& base_cfg,
                              const std::string& stage1_ckpt,
                              const StageConfig& stage2_cfg,
                              const std::vector<int>& durations_ms,
                              const std::string& run_dir) {
  SweepReport report;
  for (int d : durations_ms) {
    SimConfig sim = base_cfg;
    sim.mask_duration_ms = d;
    const std::vector<ManifestEntry> manifest = BuildManifest(corpus_dir, sim);
    StageConfig sc = stage2_cfg;
    sc.stage = 2;
    sc.mask_duration_ms = d;
    std::string sub_dir;
    if (!run_dir.empty()) {
      sub_dir = (fs::path(run_dir) / ("mask_" + std::to_string(d))).string();
      fs::create_directories(sub_dir);
      WriteManifest((fs::path(sub_dir) / "manifest.jsonl").string(), manifest);
    }
    auto [model, rec] =
        TrainStage2FromCheckpoint(stage1_ckpt, manifest, sc, sub_dir);
    (void)rec;
    EvalOptions opt;
    opt.path = EvalPath::kMarInPath;
    opt.threshold_samples = sc.detect_threshold_samples;
    metrics::EvalReport er =
        Evaluate(model, FilterSplit(manifest, Split::kTest), opt);
    SweepRow row;
    row.mask_ms = d;
    row.si_sdr = er.MeanSiSdr();
    row.si_sdri = er.MeanSiSdri();
    report.rows.push_back(row);
  }
  if (!run_dir.empty())
    report.WriteJson((fs::path(run_dir) / "sweep.json").string());
  return report;
}

std::string RenderSweepTable(const SweepReport& report) {
  std::string out;
  char line[128];
  out += "Mask Duration (ms) |   SI-SDR | SI-SDRi\n";
  out += "-------------------+----------+---------\n";
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof(line), "%18d | %8.3f | %7.3f\n", r.mask_ms,
                  r.si_sdr, r.si_sdri);
    out += line;
  }
  return out;
}

std::string RenderEvalTable(
    const std::vector<std::pair<std::string, metrics::EvalReport>>& reports) {
  std::string out;
  char line[256];
  out +=
      "System                     |   SI-SDR |  SI-SDRi |      SDR |   PESQ | "
      "  STOI\n";
  out +=
      "---------------------------+----------+----------+----------+--------+"
      "--------\n";
  for (const auto& [label, rep] : reports) {
    std::string pesq = "     -";
    if (auto p = rep.MeanPesq()) {
      char b[16];
      std::snprintf(b, sizeof(b), "%6.3f", *p);
      pesq = b;
    }
    std::snprintf(line, sizeof(line), "%-26s | %8.3f | %8.3f | %8.3f | %s | %6.3f\n",
                  label.c_str(), rep.MeanSiSdr(), rep.MeanSiSdri(),
                  rep.MeanSdr(), pesq.c_str(), rep.MeanStoi());
    out += line;
  }
  return out;
}

void WriteRunRecord(const std::string& path, const RunRecord& record) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& er : record.epochs) {
    json j;
    j["epoch"] = er.epoch;
    j["train_loss"] = er.train_loss;
    if (er.has_valid) j["valid_si_sdr"] = er.valid_si_sdr;
    j["wall_s"] = er.wall_s;
    j["is_best"] = er.is_best;
    out << j.dump() << "\n";
  }
}

}  // namespace avtse

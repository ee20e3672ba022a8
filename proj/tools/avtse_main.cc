// tools/avtse_main.cc

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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avtse/checkpoint.h"
#include "avtse/kernels.h"
#include "avtse/metrics.h"
#include "avtse/mixture_sim.h"
#include "avtse/model.h"
#include "avtse/spectrogram.h"
#include "avtse/train_eval.h"

namespace fs = std::filesystem;
using namespace avtse;

namespace {

ModelConfig LoadModelConfig(const std::string& path) {
  if (path.empty()) return ModelConfig{};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ModelConfig::FromJsonString(ss.str());
}

std::vector<int64_t> ParseCounts(const std::string& text) {
  std::vector<int64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
  if (out.size() != 3)
    throw std::runtime_error("--counts expects train,valid,test");
  return out;
}

std::string PesqToolFromEnv(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("AVTSE_PESQ_TOOL");
  return env ? env : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "avtse: audio-visual target speech extraction pipeline "
      "(simulation, training, evaluation, reports)"};
  app.require_subcommand(1);

  int threads = 0;
  bool serial = false;
  app.add_option("--threads", threads, "OpenMP thread count (0 = default)");
  app.add_flag("--serial", serial, "use the serial reference kernels");

  // --- synth-corpus ---------------------------------------------------------
  auto* synth = app.add_subcommand("synth-corpus", "generate a toy corpus");
  std::string synth_out;
  SynthConfig synth_cfg;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--speakers", synth_cfg.n_speakers, "number of speakers");
  synth->add_option("--utts", synth_cfg.utts_per_speaker, "utterances per speaker");
  synth->add_option("--seed", synth_cfg.seed, "random seed");
  synth->add_option("--visual-dim", synth_cfg.visual_channels, "visual channels");
  synth->add_option("--duration", synth_cfg.duration_s, "utterance seconds");

  // --- simulate -------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "build a mixture manifest");
  std::string sim_corpus, sim_out, sim_counts = "8,2,2";
  SimConfig sim_cfg;
  std::vector<double> sim_snr{-10.0, 10.0};
  sim->add_option("--corpus", sim_corpus, "corpus directory")->required();
  sim->add_option("--out", sim_out, "manifest path (JSON lines)")->required();
  sim->add_option("--seed", sim_cfg.seed, "random seed");
  sim->add_option("--counts", sim_counts, "train,valid,test sizes");
  sim->add_option("--snr", sim_snr, "SNR range lo hi (dB)")->expected(2);
  sim->add_option("--mask-ms", sim_cfg.mask_duration_ms,
                  "zero-mask duration (0/100/.../600 ms)");

  // --- train-stage1 ---------------------------------------------------------
  auto* t1 = app.add_subcommand("train-stage1", "train the extractor");
  std::string t1_manifest, t1_out, t1_model_cfg, t1_pretrained;
  StageConfig t1_cfg = StageConfig::Stage1Defaults();
  uint64_t t1_model_seed = 1;
  t1->add_option("--manifest", t1_manifest, "manifest path")->required();
  t1->add_option("--out", t1_out, "run directory")->required();
  t1->add_option("--model-config", t1_model_cfg, "model config JSON file");
  t1->add_option("--epochs", t1_cfg.epochs, "epochs");
  t1->add_option("--lr", t1_cfg.learning_rate, "learning rate");
  t1->add_option("--batch", t1_cfg.batch_size, "batch size");
  t1->add_option("--seed", t1_cfg.seed, "training seed");
  t1->add_option("--model-seed", t1_model_seed, "weight init seed");
  t1->add_option("--steps", t1_cfg.max_steps, "max steps (0 = all epochs)");
  t1->add_option("--grad-clip", t1_cfg.grad_clip_norm, "gradient norm clip");
  t1->add_option("--pretrained-cue", t1_pretrained,
                 "named-tensor archive with cue transformer weights");

  // --- train-stage2 ---------------------------------------------------------
  auto* t2 = app.add_subcommand("train-stage2",
                                "train the recovery block on masked input");
  std::string t2_manifest, t2_out, t2_stage1;
  StageConfig t2_cfg = StageConfig::Stage2Defaults();
  t2->add_option("--manifest", t2_manifest, "masked manifest path")->required();
  t2->add_option("--stage1", t2_stage1, "stage-one checkpoint")->required();
  t2->add_option("--out", t2_out, "run directory")->required();
  t2->add_option("--epochs", t2_cfg.epochs, "epochs");
  t2->add_option("--lr", t2_cfg.learning_rate, "learning rate");
  t2->add_option("--batch", t2_cfg.batch_size, "batch size");
  t2->add_option("--seed", t2_cfg.seed, "training seed");
  t2->add_option("--steps", t2_cfg.max_steps, "max steps (0 = all epochs)");
  t2->add_option("--mask-ms", t2_cfg.mask_duration_ms,
                 "mask duration the manifest was built with");

  // --- evaluate -------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "run metrics over a split");
  std::string ev_model, ev_manifest, ev_split = "test", ev_out, ev_csv,
              ev_pesq, ev_dump;
  bool ev_no_mar = false;
  ev->add_option("--model", ev_model, "checkpoint path")->required();
  ev->add_option("--manifest", ev_manifest, "manifest path")->required();
  ev->add_option("--split", ev_split, "train|valid|test");
  ev->add_option("--out", ev_out, "report JSON path")->required();
  ev->add_option("--csv", ev_csv, "also write CSV here");
  ev->add_flag("--no-mar", ev_no_mar,
               "bypass the recovery block even for stage-two checkpoints");
  ev->add_option("--pesq-tool", ev_pesq,
                 "external PESQ binary (default: $AVTSE_PESQ_TOOL)");
  ev->add_option("--dump-audio", ev_dump, "write per-utterance wavs here");

  // --- sweep ----------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "mask-duration sweep");
  std::string sw_corpus, sw_stage1, sw_out, sw_counts = "8,2,2";
  std::vector<int> sw_durations{100, 200, 300, 400, 500, 600};
  SimConfig sw_sim;
  StageConfig sw_cfg = StageConfig::Stage2Defaults();
  sw->add_option("--corpus", sw_corpus, "corpus directory")->required();
  sw->add_option("--stage1", sw_stage1, "stage-one checkpoint")->required();
  sw->add_option("--out", sw_out, "sweep run directory")->required();
  sw->add_option("--durations", sw_durations, "mask durations in ms");
  sw->add_option("--seed", sw_sim.seed, "simulation seed");
  sw->add_option("--counts", sw_counts, "train,valid,test sizes");
  sw->add_option("--epochs", sw_cfg.epochs, "stage-two epochs per duration");
  sw->add_option("--steps", sw_cfg.max_steps, "stage-two step cap");
  sw->add_option("--batch", sw_cfg.batch_size, "batch size");
  sw->add_option("--train-seed", sw_cfg.seed, "training seed");

  // --- spectrogram ----------------------------------------------------------
  auto* sp = app.add_subcommand("spectrogram",
                                "render mixture/extracted/ground-truth "
                                "log-magnitude spectrograms");
  std::string sp_mix, sp_ref, sp_est, sp_model, sp_visual, sp_outdir = ".";
  sp->add_option("--mixture", sp_mix, "mixture wav")->required();
  sp->add_option("--reference", sp_ref, "ground-truth wav")->required();
  sp->add_option("--extracted", sp_est, "extracted wav (optional)");
  sp->add_option("--model", sp_model,
                 "checkpoint; extracts from the mixture when --extracted "
                 "is not given (requires --visual)");
  sp->add_option("--visual", sp_visual, "visual feature file for --model");
  sp->add_option("--out-dir", sp_outdir, "output directory");

  // --- report ---------------------------------------------------------------
  auto* rp = app.add_subcommand("report", "merge reports into text tables");
  std::vector<std::string> rp_eval;
  std::string rp_sweep, rp_out;
  rp->add_option("--eval", rp_eval, "evaluation report JSON files");
  rp->add_option("--sweep", rp_sweep, "sweep report JSON file");
  rp->add_option("--out", rp_out, "write the table here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  if (threads > 0) kernels::SetNumThreads(threads);
  kernels::SetParallel(!serial);

  try {
    if (*synth) {
      SynthCorpus(synth_out, synth_cfg);
      std::cout << "corpus written to " << synth_out << "\n";
    } else if (*sim) {
      const auto counts = ParseCounts(sim_counts);
      sim_cfg.train_count = counts[0];
      sim_cfg.valid_count = counts[1];
      sim_cfg.test_count = counts[2];
      sim_cfg.snr_lo_db = sim_snr[0];
      sim_cfg.snr_hi_db = sim_snr[1];
      const auto entries = BuildManifest(sim_corpus, sim_cfg);
      WriteManifest(sim_out, entries);
      std::cout << "manifest with " << entries.size() << " entries written to "
                << sim_out << "\n";
    } else if (*t1) {
      AvtseModel model(LoadModelConfig(t1_model_cfg), t1_model_seed);
      if (!t1_pretrained.empty()) {
        const int n = ImportCueTransformer(model, t1_pretrained);
        std::cout << "imported " << n << " cue transformer tensors\n";
      }
      const auto manifest = ReadManifest(t1_manifest);
      const RunRecord rec = TrainStage1(model, manifest, t1_cfg, t1_out);
      std::cout << "stage-1 done: best epoch " << rec.best_epoch
                << ", checkpoint " << rec.best_checkpoint << "\n";
    } else if (*t2) {
      const auto manifest = ReadManifest(t2_manifest);
      auto [model, rec] =
          TrainStage2FromCheckpoint(t2_stage1, manifest, t2_cfg, t2_out);
      (void)model;
      std::cout << "stage-2 done: best epoch " << rec.best_epoch
                << ", checkpoint " << rec.best_checkpoint << "\n";
    } else if (*ev) {
      int stage = 0;
      AvtseModel model = LoadCheckpoint(ev_model, &stage);
      EvalOptions opt;
      opt.path = (stage >= 2 && !ev_no_mar) ? EvalPath::kMarInPath
                                            : EvalPath::kExtract;
      opt.pesq_tool = PesqToolFromEnv(ev_pesq);
      opt.dump_dir = ev_dump;
      const auto entries =
          FilterSplit(ReadManifest(ev_manifest), SplitFromName(ev_split));
      const metrics::EvalReport report = Evaluate(model, entries, opt);
      report.WriteJson(ev_out);
      if (!ev_csv.empty()) report.WriteCsv(ev_csv);
      std::cout << "evaluated " << report.records.size()
                << " utterances; mean SI-SDR " << report.MeanSiSdr() << " dB\n";
    } else if (*sw) {
      const auto counts = ParseCounts(sw_counts);
      sw_sim.train_count = counts[0];
      sw_sim.valid_count = counts[1];
      sw_sim.test_count = counts[2];
      const SweepReport rep = SweepMaskDuration(
          sw_corpus, sw_sim, sw_stage1, sw_cfg, sw_durations, sw_out);
      std::cout << RenderSweepTable(rep);
    } else if (*sp) {
      fs::create_directories(sp_outdir);
      const Waveform mix = ReadAudio(sp_mix);
      const Waveform ref = ReadAudio(sp_ref);
      Waveform est;
      if (!sp_est.empty()) {
        est = ReadAudio(sp_est);
      } else if (!sp_model.empty()) {
        if (sp_visual.empty())
          throw std::runtime_error("--model requires --visual features");
        int stage = 0;
        AvtseModel model = LoadCheckpoint(sp_model, &stage);
        const FeatureSequence vis = ReadFeatures(sp_visual);
        est = stage >= 2 ? model.ForwardStage2(mix, vis).s_hat
                         : model.Extract(mix, vis).s_hat;
      } else {
        throw std::runtime_error("need --extracted or --model");
      }
      WriteSpectrogramPng((fs::path(sp_outdir) / "mixture.png").string(), mix);
      WriteSpectrogramPng((fs::path(sp_outdir) / "extracted.png").string(), est);
      WriteSpectrogramPng((fs::path(sp_outdir) / "ground_truth.png").string(),
                          ref);
      std::cout << "spectrograms written to " << sp_outdir << "\n";
    } else if (*rp) {
      std::string table;
      if (!rp_sweep.empty()) {
        table = RenderSweepTable(SweepReport::ReadJson(rp_sweep));
      } else if (!rp_eval.empty()) {
        std::vector<std::pair<std::string, metrics::EvalReport>> reports;
        for (const auto& path : rp_eval)
          reports.emplace_back(fs::path(path).stem().string(),
                               metrics::EvalReport::ReadJson(path));
        table = RenderEvalTable(reports);
      } else {
        throw std::runtime_error("report: need --eval or --sweep");
      }
      if (rp_out.empty()) {
        std::cout << table;
      } else {
        std::ofstream out(rp_out, std::ios::trunc);
        out << table;
        std::cout << "table written to " << rp_out << "\n";
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

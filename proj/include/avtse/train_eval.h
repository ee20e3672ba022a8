// include/avtse/train_eval.h

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

#ifndef AVTSE_TRAIN_EVAL_H_
#define AVTSE_TRAIN_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "avtse/metrics.h"
#include "avtse/mixture_sim.h"
#include "avtse/model.h"
#include "avtse/objectives.h"

namespace avtse {

struct StageConfig {
  int stage = 1;
  int64_t epochs = 150;  // stage two defaults to 30
  double learning_rate = 1.5e-4;
  int64_t batch_size = 2;
  int mask_duration_ms = 0;  // stage two: must match the manifest
  double grad_clip_norm = 5.0;
  uint64_t seed = 0;
  int64_t max_steps = 0;  // 0 = run all epochs; otherwise stop after N steps
  LossWeights weights;    // stage one forces (alpha, 0, 0)
  int64_t detect_threshold_samples = 20;

  static StageConfig Stage1Defaults();
  static StageConfig Stage2Defaults();
};

struct EpochRecord {
  int64_t epoch = 0;
  double train_loss = 0.0;
  double valid_si_sdr = 0.0;
  bool has_valid = false;
  double wall_s = 0.0;
  bool is_best = false;
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  int64_t best_epoch = -1;
  double best_valid_si_sdr = 0.0;
  std::string best_checkpoint;
  int64_t total_steps = 0;
};

/// Adaptive-moment optimizer over a fixed parameter set.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::vector<Parameter*> params, double lr,
                         double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);
  void ScaleGrads(double factor);
  double GradNorm() const;
  void ClipGradNorm(double max_norm);
  void Step();
  void ZeroGrads();
  void SetLearningRate(double lr) { lr_ = lr; }

 private:
  struct Slot {
    Tensor m, v;
  };
  std::vector<Parameter*> params_;
  std::vector<Slot> slots_;
  double lr_, b1_, b2_, eps_;
  int64_t t_ = 0;
};

/// Stage one: optimizes the SI-SDR loss of the extractor on intact
/// mixtures. Checkpoints per epoch into run_dir (unless empty); the best
/// checkpoint is the maximum-validation-SI-SDR epoch.
RunRecord TrainStage1(AvtseModel& model,
                      const std::vector<ManifestEntry>& manifest,
                      const StageConfig& cfg, const std::string& run_dir);

/// Stage two: all groups start from the given model (normally a stage-one
/// checkpoint) except the recovery block, which the caller re-randomizes;
/// optimizes the (alpha, beta, gamma) objective on masked mixtures.
RunRecord TrainStage2(AvtseModel& model,
                      const std::vector<ManifestEntry>& manifest,
                      const StageConfig& cfg, const std::string& run_dir);

/// Convenience: load the stage-one checkpoint, re-randomize the recovery
/// block, train stage two.
std::pair<AvtseModel, RunRecord> TrainStage2FromCheckpoint(
    const std::string& stage1_ckpt, const std::vector<ManifestEntry>& manifest,
    const StageConfig& cfg, const std::string& run_dir);

enum class EvalPath { kExtract, kMarInPath };

struct EvalOptions {
  EvalPath path = EvalPath::kExtract;
  int64_t threshold_samples = 20;
  std::string pesq_tool;  // empty = skip PESQ
  std::string dump_dir;   // non-empty: write mixture/est/ref wavs
};

metrics::EvalReport Evaluate(const AvtseModel& model,
                             const std::vector<ManifestEntry>& entries,
                             const EvalOptions& opt);

/// Mean SI-SDR improvement of the model over the raw mixture on the given
/// entries (the stage-one training metric).
double MeanSiSdrImprovement(const AvtseModel& model,
                            const std::vector<ManifestEntry>& entries,
                            EvalPath path = EvalPath::kExtract);

/// Mean recovery loss (masked-region embedding MSE) over entries with masks.
double MeanRecoverLoss(const AvtseModel& model,
                       const std::vector<ManifestEntry>& entries,
                       int64_t threshold_samples = 20);

struct SweepRow {
  int mask_ms = 0;
  double si_sdr = 0.0;
  double si_sdri = 0.0;
};
struct SweepReport {
  std::vector<SweepRow> rows;
  std::string ToJsonString() const;
  static SweepReport FromJsonString(const std::string& s);
  void WriteJson(const std::string& path) const;
  static SweepReport ReadJson(const std::string& path);
};

/// For each mask duration: rebuild the masked manifest, train stage two
/// from the stage-one checkpoint, evaluate on the test split, emit one row.
SweepReport SweepMaskDuration(const std::string& corpus_dir,
                              const SimConfig& base_cfg,
                              const std::string& stage1_ckpt,
                              const StageConfig& stage2_cfg,
                              const std::vector<int>& durations_ms,
                              const std::string& run_dir);

/// Text tables for reports (fixed column layout).
std::string RenderSweepTable(const SweepReport& report);
std::string RenderEvalTable(
    const std::vector<std::pair<std::string, metrics::EvalReport>>& reports);

void WriteRunRecord(const std::string& path, const RunRecord& record);

}  // namespace avtse

#endif  // AVTSE_TRAIN_EVAL_H_

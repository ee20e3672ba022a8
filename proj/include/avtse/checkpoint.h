// include/avtse/checkpoint.h

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

#ifndef AVTSE_CHECKPOINT_H_
#define AVTSE_CHECKPOINT_H_

#include <string>
#include <utility>
#include <vector>

#include "avtse/model.h"

namespace avtse {

/// Named-tensor archive:
///   "AVTSE-CKPT v1 tensors=<n>\n"
///   one JSON metadata line
///   per tensor: "tensor name=<name> dtype=<f32|f64> dims=<d0,d1,...>\n"
///               followed by the raw little-endian payload.
/// Our checkpoints write f64 payloads so a save/load round trip reproduces
/// forward outputs bitwise; f32 payloads are accepted on read for importing
/// externally trained weights.
struct ArchiveEntry {
  std::string name;
  Tensor tensor;
};

void WriteArchive(const std::string& path, const std::string& metadata_json,
                  const std::vector<ArchiveEntry>& entries,
                  bool as_float32 = false);
std::pair<std::string, std::vector<ArchiveEntry>> ReadArchive(
    const std::string& path);

/// Model checkpoint = archive of all parameters + metadata holding the
/// ModelConfig and the training stage.
void SaveCheckpoint(const std::string& path, const AvtseModel& model,
                    int stage);

struct LoadedCheckpoint {
  ModelConfig config;
  int stage = 0;
  // Parameters are applied onto a freshly constructed model.
};
LoadedCheckpoint PeekCheckpoint(const std::string& path);
AvtseModel LoadCheckpoint(const std::string& path, int* stage_out = nullptr);

/// Imports cue-encoder transformer weights from a named-tensor archive.
/// Archive names may be the full parameter names ("cue_encoder.transformer."
/// prefix included) or bare stack names ("layer0.attn.q.weight", ...), which
/// are resolved against "cue_encoder.transformer.". Returns the number of
/// tensors applied; unknown names or shape mismatches throw.
int ImportCueTransformer(AvtseModel& model, const std::string& archive_path);

}  // namespace avtse

#endif  // AVTSE_CHECKPOINT_H_

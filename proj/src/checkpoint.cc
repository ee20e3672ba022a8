// src/checkpoint.cc

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

#include "avtse/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace avtse {

void WriteArchive(const std::string& path, const std::string& metadata_json,
                  const std::vector<ArchiveEntry>& entries, bool as_float32) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "AVTSE-CKPT v1 tensors=" << entries.size() << "\n";
  out << metadata_json << "\n";
  for (const auto& e : entries) {
    out << "tensor name=" << e.name
        << " dtype=" << (as_float32 ? "f32" : "f64") << " dims=";
    for (int i = 0; i < e.tensor.Rank(); ++i) {
      if (i) out << ",";
      out << e.tensor.Dim(i);
    }
    out << "\n";
    if (as_float32) {
      std::vector<float> buf(static_cast<size_t>(e.tensor.NumEl()));
      for (int64_t i = 0; i < e.tensor.NumEl(); ++i)
        buf[static_cast<size_t>(i)] = static_cast<float>(e.tensor[i]);
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * 4));
    } else {
      out.write(reinterpret_cast<const char*>(e.tensor.Data()),
                static_cast<std::streamsize>(e.tensor.NumEl() * 8));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<std::string, std::vector<ArchiveEntry>> ReadArchive(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open archive: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("AVTSE-CKPT v1", 0) != 0)
    throw std::runtime_error("not an AVTSE checkpoint: " + path);
  int64_t count = -1;
  {
    const auto pos = line.find("tensors=");
    if (pos == std::string::npos)
      throw std::runtime_error("malformed archive header: " + path);
    count = std::stoll(line.substr(pos + 8));
  }
  std::string metadata;
  if (!std::getline(in, metadata))
    throw std::runtime_error("missing archive metadata: " + path);

  std::vector<ArchiveEntry> entries;
  for (int64_t t = 0; t < count; ++t) {
    if (!std::getline(in, line) || line.rfind("tensor ", 0) != 0)
      throw std::runtime_error("malformed tensor header in: " + path);
    std::string name, dtype, dims;
    std::istringstream hs(line.substr(7));
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("name=", 0) == 0) name = tok.substr(5);
      else if (tok.rfind("dtype=", 0) == 0) dtype = tok.substr(6);
      else if (tok.rfind("dims=", 0) == 0) dims = tok.substr(5);
    }
    if (name.empty() || (dtype != "f32" && dtype != "f64"))
      throw std::runtime_error("malformed tensor header in: " + path);
    std::vector<int64_t> shape;
    {
      std::istringstream ds(dims);
      std::string d;
      while (std::getline(ds, d, ',')) shape.push_back(std::stoll(d));
    }
    Tensor tensor(shape);
    const int64_t n = tensor.NumEl();
    if (dtype == "f64") {
      in.read(reinterpret_cast<char*>(tensor.Data()),
              static_cast<std::streamsize>(n * 8));
      if (in.gcount() != static_cast<std::streamsize>(n * 8))
        throw std::runtime_error("truncated tensor payload in: " + path);
    } else {
      std::vector<float> buf(static_cast<size_t>(n));
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(n * 4));
      if (in.gcount() != static_cast<std::streamsize>(n * 4))
        throw std::runtime_error("truncated tensor payload in: " + path);
      for (int64_t i = 0; i < n; ++i)
        tensor[i] = static_cast<double>(buf[static_cast<size_t>(i)]);
    }
    entries.push_back({std::move(name), std::move(tensor)});
  }
  return {std::move(metadata), std::move(entries)};
}

void SaveCheckpoint(const std::string& path, const AvtseModel& model,
                    int stage) {
  json meta;
  meta["format"] = 1;
  meta["stage"] = stage;
  meta["config"] = json::parse(model.Config().ToJsonString());
  std::vector<ArchiveEntry> entries;
  for (const Parameter* p : model.Params())
    entries.push_back({p->name, p->value});
  WriteArchive(path, meta.dump(), entries, /*as_float32=*/false);
}

LoadedCheckpoint PeekCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line, metadata;
  if (!std::getline(in, line) || line.rfind("AVTSE-CKPT v1", 0) != 0)
    throw std::runtime_error("not an AVTSE checkpoint: " + path);
  if (!std::getline(in, metadata))
    throw std::runtime_error("missing checkpoint metadata: " + path);
  json meta = json::parse(metadata);
  LoadedCheckpoint out;
  out.stage = meta.value("stage", 0);
  out.config = ModelConfig::FromJsonString(meta.at("config").dump());
  return out;
}

AvtseModel LoadCheckpoint(const std::string& path, int* stage_out) {
  auto [metadata, entries] = ReadArchive(path);
  json meta = json::parse(metadata);
  if (stage_out) *stage_out = meta.value("stage", 0);
  ModelConfig cfg = ModelConfig::FromJsonString(meta.at("config").dump());
  AvtseModel model(cfg, /*seed=*/0);
  size_t applied = 0;
  for (const auto& e : entries) {
    Parameter* p = model.Find(e.name);
    if (!p)
      throw std::runtime_error("checkpoint tensor has no home: " + e.name);
    if (!p->value.SameShape(e.tensor))
      throw std::runtime_error("checkpoint shape mismatch for " + e.name +
                               ": " + e.tensor.ShapeString() + " vs " +
                               p->value.ShapeString());
    p->value = e.tensor;
    ++applied;
  }
  if (applied != static_cast<size_t>(model.NumParameterTensors()))
    throw std::runtime_error("checkpoint is missing tensors (" +
                             std::to_string(applied) + " of " +
                             std::to_string(model.NumParameterTensors()) + ")");
  return model;
}

int ImportCueTransformer(AvtseModel& model, const std::string& archive_path) {
  auto [metadata, entries] = ReadArchive(archive_path);
  (void)metadata;
  int applied = 0;
  for (const auto& e : entries) {
    std::string name = e.name;
    if (name.rfind("cue_encoder.", 0) != 0)
      name = "cue_encoder.transformer." + name;
    Parameter* p = model.Find(name);
    if (!p)
      throw std::runtime_error("import: unknown cue tensor " + e.name);
    if (p->group != "cue_encoder")
      throw std::runtime_error("import: " + name + " is not a cue tensor");
    if (!p->value.SameShape(e.tensor))
      throw std::runtime_error("import shape mismatch for " + name + ": " +
                               e.tensor.ShapeString() + " vs " +
                               p->value.ShapeString());
    p->value = e.tensor;
    ++applied;
  }
  return applied;
}

}  // namespace avtse

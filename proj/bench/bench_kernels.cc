// bench/bench_kernels.cc

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

// Times the serial reference kernels against the OpenMP versions, plus one
// end-to-end extractor forward pass. Run after `cmake --build`:
//   ./build/bench/avtse_bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "avtse/kernels.h"
#include "avtse/model.h"
#include "avtse/rng.h"

using namespace avtse;

namespace {

Tensor RandomTensor(std::vector<int64_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.NumEl(); ++i) t[i] = 2.0 * rng.Uniform() - 1.0;
  return t;
}

double TimeIt(const std::function<void()>& fn, int repeats) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void Report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  Rng rng(1234);

  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp",
              "speedup");

  {
    const int64_t T = 64000, Ci = 1, Co = 64, K = 40;
    Tensor x = RandomTensor({T, Ci}, rng);
    Tensor w = RandomTensor({Co, Ci, K}, rng);
    const int64_t To = (T - K) / 20 + 1;
    Tensor y({To, Co});
    auto fn = [&]() {
      kernels::Conv1dForward(x.Data(), T, Ci, w.Data(), Co, K, nullptr, 20, 1,
                             0, y.Data(), To);
    };
    kernels::SetParallel(false);
    const double s = TimeIt(fn, repeats);
    kernels::SetParallel(true);
    const double p = TimeIt(fn, repeats);
    Report("conv1d fwd 64k x 64", s, p);
  }

  {
    const int64_t m = 3200, k = 256, n = 256;
    Tensor a = RandomTensor({m, k}, rng);
    Tensor b = RandomTensor({n, k}, rng);
    Tensor c({m, n});
    auto fn = [&]() {
      kernels::MatMul(a.Data(), b.Data(), c.Data(), m, k, n, false, true,
                      false);
    };
    kernels::SetParallel(false);
    const double s = TimeIt(fn, repeats);
    kernels::SetParallel(true);
    const double p = TimeIt(fn, repeats);
    Report("matmul 3200x256x256", s, p);
  }

  {
    const int64_t T = 1600, d = 64, nh = 4;
    Tensor q = RandomTensor({T, d}, rng), k = RandomTensor({T, d}, rng),
           v = RandomTensor({T, d}, rng), o({T, d});
    Tensor dq({T, d}), dk({T, d}), dv({T, d});
    auto fwd = [&]() {
      kernels::AttentionForward(q.Data(), k.Data(), v.Data(), T, d, nh,
                                o.Data());
    };
    auto bwd = [&]() {
      dq.SetZero();
      dk.SetZero();
      dv.SetZero();
      kernels::AttentionBackward(q.Data(), k.Data(), v.Data(), o.Data(), T, d,
                                 nh, dq.Data(), dk.Data(), dv.Data());
    };
    kernels::SetParallel(false);
    const double fs = TimeIt(fwd, repeats);
    const double bs = TimeIt(bwd, repeats);
    kernels::SetParallel(true);
    const double fp = TimeIt(fwd, repeats);
    const double bp = TimeIt(bwd, repeats);
    Report("attention fwd 1600x64", fs, fp);
    Report("attention bwd 1600x64", bs, bp);
  }

  {
    ModelConfig cfg;
    cfg.encoder_channels = 32;
    cfg.bottleneck_channels = 16;
    cfg.conv_channels = 32;
    cfg.conv_blocks = 2;
    cfg.extractor_iterations = 2;
    cfg.visual_channels = 16;
    cfg.av_width = 16;
    cfg.av_layers = 2;
    cfg.av_heads = 2;
    cfg.mar_layers = 2;
    cfg.max_mar_positions = 4000;
    AvtseModel model(cfg, 1);
    Waveform mix;
    mix.sample_rate = 16000;
    mix.samples.resize(64000);
    for (auto& s : mix.samples) s = 2.0 * rng.Uniform() - 1.0;
    FeatureSequence vis;
    vis.frame_rate = 25.0;
    vis.data = RandomTensor({100, 16}, rng);
    auto fn = [&]() { (void)model.Extract(mix, vis); };
    kernels::SetParallel(false);
    const double s = TimeIt(fn, std::max(1, repeats / 2));
    kernels::SetParallel(true);
    const double p = TimeIt(fn, std::max(1, repeats / 2));
    Report("extract fwd 4s miniature", s, p);
  }

  return 0;
}

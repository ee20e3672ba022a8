// tests/test_util.h

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

#ifndef AVTSE_TESTS_TEST_UTIL_H_
#define AVTSE_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "avtse/autograd.h"
#include "avtse/rng.h"
#include "avtse/tensor.h"

namespace avtse {
namespace testutil {

inline Tensor RandomTensor(std::vector<int64_t> shape, Rng& rng,
                           double scale = 1.0) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.NumEl(); ++i)
    t[i] = scale * (2.0 * rng.Uniform() - 1.0);
  return t;
}

inline double RelErr(double a, double b, double floor = 1e-9) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

/// Compares analytic parameter gradients of the scalar graph built by
/// `build` against central finite differences, element by element.
/// Returns the worst relative error seen.
inline double MaxGradError(const std::vector<Parameter*>& params,
                           const std::function<Value(Graph&)>& build,
                           double h = 1e-6) {
  for (Parameter* p : params) p->grad.SetZero();
  {
    Graph g;
    g.Backward(build(g));
  }
  double worst = 0.0;
  for (Parameter* p : params) {
    for (int64_t i = 0; i < p->value.NumEl(); ++i) {
      const double orig = p->value[i];
      const double step = h * std::max(1.0, std::abs(orig));
      p->value[i] = orig + step;
      double lp;
      {
        Graph g;
        lp = g.Scalar(build(g));
      }
      p->value[i] = orig - step;
      double lm;
      {
        Graph g;
        lm = g.Scalar(build(g));
      }
      p->value[i] = orig;
      const double numeric = (lp - lm) / (2.0 * step);
      worst = std::max(worst, RelErr(p->grad[i], numeric, 1e-7));
    }
  }
  return worst;
}

/// Unique scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("avtse_test_" + tag + "_" + std::to_string(counter++)))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string File(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

}  // namespace testutil
}  // namespace avtse

#endif  // AVTSE_TESTS_TEST_UTIL_H_

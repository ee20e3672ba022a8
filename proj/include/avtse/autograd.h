// include/avtse/autograd.h

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

#ifndef AVTSE_AUTOGRAD_H_
#define AVTSE_AUTOGRAD_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "avtse/tensor.h"

namespace avtse {

/// A named trainable tensor. Gradients accumulate across Graph::Backward
/// calls until cleared; groups mirror the checkpoint layout.
struct Parameter {
  std::string name;
  std::string group;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, std::string g, Tensor v)
      : name(std::move(n)), group(std::move(g)), value(std::move(v)) {
    grad = Tensor(value.Shape());
  }
};

/// Handle into a Graph's tape.
struct Value {
  int32_t id = -1;
  bool Valid() const { return id >= 0; }
};

/// Define-by-run reverse-mode tape. One Graph per forward pass; ops append
/// nodes, Backward sweeps them in reverse. Shared parameters registered
/// several times map to a single leaf, so their gradients accumulate
/// naturally (the iterated extractor relies on this).
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Value Input(Tensor t);
  Value Param(Parameter* p);

  const Tensor& Data(Value v) const { return nodes_[static_cast<size_t>(v.id)].out; }
  double Scalar(Value v) const { return Data(v)[0]; }
  bool NeedsGrad(Value v) const { return nodes_[static_cast<size_t>(v.id)].needs_grad; }
  int64_t NumNodes() const { return static_cast<int64_t>(nodes_.size()); }

  // Elementwise / shape ops.
  Value Add(Value a, Value b);
  Value Sub(Value a, Value b);
  Value Mul(Value a, Value b);
  Value Scale(Value a, double c);
  Value AddBias(Value x, Value b);
  Value Relu(Value x);
  Value Gelu(Value x);
  Value ConcatCols(Value a, Value b);
  Value SliceRows(Value x, int64_t start, int64_t len);
  Value EdgePadRows(Value x, int64_t extra);
  Value RepeatRows(Value x, int64_t factor);

  // Network layers. Bias Values may be invalid ({}) for bias-free layers.
  Value Conv1d(Value x, Value w, Value b, int64_t stride, int64_t dil,
               int64_t pad);
  Value ConvT1d(Value x, Value w, int64_t stride);
  Value DwConv1d(Value x, Value w, Value b, int64_t dil, int64_t pad);
  Value Linear(Value x, Value w, Value b);
  Value LayerNorm(Value x, Value gamma, Value beta, double eps = 1e-5);
  Value Attention(Value q, Value k, Value v, int64_t num_heads);

  // Reductions and scalar ([1]-tensor) arithmetic.
  Value Dot(Value a, Value b);
  Value MulScalar(Value x, Value s);
  Value SAdd(Value a, Value b);
  Value SAddConst(Value a, double c);
  Value SMul(Value a, Value b);
  Value SDiv(Value a, Value b);
  Value SLog10(Value a);

  /// Reverse sweep from a scalar loss; leaf gradients land in Parameter::grad.
  void Backward(Value loss);

 private:
  // Receives this graph and the node's own output gradient.
  using BackwardFn = std::function<void(Graph&, const Tensor&)>;

  struct Node {
    Tensor out;
    Tensor grad;
    bool needs_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  Value Emit(Tensor out, bool needs_grad, BackwardFn backward);
  Tensor& GradRef(Value v);
  void Accum(Value v, const Tensor& g);

  // deque keeps node storage stable: Data() references stay valid while
  // later ops append to the tape.
  std::deque<Node> nodes_;
  std::unordered_map<Parameter*, int32_t> param_ids_;
};

}  // namespace avtse

#endif  // AVTSE_AUTOGRAD_H_

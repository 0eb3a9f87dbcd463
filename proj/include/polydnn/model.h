// Copyright 2026 The polydnn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polydnn {

enum class ActivationKind { kReLU, kLeakyReLU, kSigmoid, kTanh, kIdentity };

// Negative-side slope of LeakyReLU. Fixed; the model file may restate it but
// never change it.
inline constexpr double kLeakySlope = 0.01;

double Activate(ActivationKind kind, double x);
std::string_view ActivationName(ActivationKind kind);
ActivationKind ParseActivation(std::string_view name);

enum class LayerKind {
  kDense,
  kConv2D,
  kMaxPool,
  kMeanPool,
  kBatchNorm,
  kSoftmaxOutput,
};

std::string_view LayerKindName(LayerKind kind);
LayerKind ParseLayerKind(std::string_view name);

// How a MaxPool layer is lowered to a polynomial.
enum class PoolMode {
  kUnset,
  kMean,  // scaled-mean replacement; only sound when trained that way
  kEq2,   // chained pairwise max with a polynomial square root
};

struct BatchNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> mean;
  std::vector<double> var;
};

// Operation counters filled by the instrumented evaluators.
struct OpCounts {
  std::uint64_t mul = 0;
  std::uint64_t add = 0;
  std::uint64_t cmp = 0;
  std::uint64_t other = 0;  // exp, division, sqrt

  std::uint64_t total() const { return mul + add + cmp + other; }
};

// One layer of a feed-forward network. Pre-activation of a weighted unit is
// sum_i w_i x_i + bias (bias is added, not subtracted).
//
// Dense / SoftmaxOutput: weights is width x input_width.
// Conv2D: weights[j] is aligned with connectivity[j] (unrolled kernel).
// MaxPool / MeanPool: connectivity only; no weights, identity activation.
// BatchNorm: width == input_width, per-unit bn parameters.
struct Layer {
  LayerKind kind = LayerKind::kDense;
  std::size_t input_width = 0;
  std::size_t width = 0;
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  ActivationKind activation = ActivationKind::kIdentity;
  std::optional<BatchNormParams> bn;
  std::vector<std::vector<std::size_t>> connectivity;
  PoolMode pool_mode = PoolMode::kUnset;

  bool IsWeighted() const {
    return kind == LayerKind::kDense || kind == LayerKind::kConv2D ||
           kind == LayerKind::kSoftmaxOutput;
  }

  // Predecessor indices feeding unit j, in weight order.
  std::vector<std::size_t> Inputs(std::size_t j) const;
};

struct ModelGraph {
  std::string name;
  std::string version;
  std::size_t input_width = 0;
  std::vector<Layer> layers;

  std::size_t output_width() const {
    return layers.empty() ? input_width : layers.back().width;
  }
  std::vector<std::size_t> widths() const;
  bool HasBatchNorm() const;
};

// Throws ValidationError naming the layer index on the first violation.
void Validate(const ModelGraph& model);

// Folds every BatchNorm layer into its adjacent weighted layer.
ModelGraph FoldBatchNorm(const ModelGraph& model);

struct Inference {
  std::vector<double> logits;
  std::vector<double> probabilities;  // softmax output; empty without softmax
  std::size_t predicted_class = 0;
};

// Ties resolve to the lowest index.
std::size_t Argmax(std::span<const double> values);

// Float forward pass with the true activations.
Inference ReferenceInfer(const ModelGraph& model, std::span<const double> x,
                         OpCounts* counts = nullptr);

// Per-layer values fed to each layer's nonlinearity: weighted-sum or
// normalized values for weighted/BatchNorm layers, the pooled inputs for
// pooling layers.
std::vector<std::vector<double>> LayerPreActivations(const ModelGraph& model,
                                                     std::span<const double> x);

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_width() const {
    return inputs.empty() ? 0 : inputs.front().size();
  }
};

void Validate(const Dataset& data);

}  // namespace polydnn

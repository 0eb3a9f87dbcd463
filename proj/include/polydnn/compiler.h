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
#include <vector>

#include "polydnn/approx.h"
#include "polydnn/model.h"
#include "polydnn/polyalg.h"

namespace polydnn {

// drop_argmax compiles a softmax output layer to its logits and classifies by
// argmax, which softmax preserves. none requires a logit (identity dense)
// output layer.
enum class SoftmaxMode { kDropArgmax, kNone };

std::string_view SoftmaxModeName(SoftmaxMode mode);
SoftmaxMode ParseSoftmaxMode(std::string_view name);

struct Operand {
  enum class Source : std::uint8_t { kInput, kNode };
  Source source = Source::kInput;
  std::size_t index = 0;
  double weight = 0.0;

  friend bool operator==(const Operand&, const Operand&) = default;
};

// value = activation(sum_i w_i * v(inputs_i) + bias) + sum_i s_i * v(linear_i)
//
// Ordinary units leave `linear` empty. A lowered pairwise max uses it for the
// (x + y)/2 part, with the activation applied to x - y.
struct PolyNode {
  std::size_t id = 0;
  std::size_t layer = 0;
  std::size_t unit = 0;
  std::vector<Operand> inputs;
  double bias = 0.0;
  UniPoly activation = UniPoly::Identity();
  std::vector<Operand> linear;
  // Every outgoing weight of this node is exactly zero.
  bool is_pseudo = false;
  // Intermediate node of a lowered max chain; not a network unit.
  bool is_helper = false;

  friend bool operator==(const PolyNode&, const PolyNode&) = default;
};

struct LayerReport {
  std::size_t layer = 0;
  LayerKind kind = LayerKind::kDense;
  ActivationKind activation = ActivationKind::kIdentity;
  int degree = 0;
  double radius = 0.0;
  FitReport fit;
  std::size_t nodes = 0;
};

struct PolyProgram {
  std::size_t input_width = 0;
  std::vector<PolyNode> nodes;  // topological order, nodes[i].id == i
  std::vector<std::size_t> output_node_ids;
  SoftmaxMode softmax_mode = SoftmaxMode::kDropArgmax;
  int degree = 0;
  std::vector<double> intervals;  // per model layer radius
  std::vector<LayerReport> reports;

  std::size_t unit_count() const;
};

// Checks topological order, operand ranges and the pseudo-node invariant.
void Validate(const PolyProgram& program);

struct CompileOptions {
  int degree = 30;
  // Radius per model layer; typically from CalibrateIntervals.
  std::vector<double> intervals;
  // Overrides the per-layer pool_mode flag of MaxPool layers when set.
  PoolMode pool_mode = PoolMode::kUnset;
  SoftmaxMode softmax_mode = SoftmaxMode::kDropArgmax;
  int sqrt_degree = 20;
  PolyLimits limits;
};

// Requires a BatchNorm-free model (see FoldBatchNorm).
PolyProgram CompileNested(const ModelGraph& model, const CompileOptions& options);

struct NestedResult {
  std::vector<double> outputs;
  std::size_t predicted_class = 0;
  std::vector<std::uint32_t> evaluations;  // per node
};

// One memoized pass in topological order.
NestedResult EvalNested(const PolyProgram& program, std::span<const double> x,
                        OpCounts* counts = nullptr);

struct ExpandedNetworkPoly {
  std::size_t input_width = 0;
  std::vector<SparseMultiPoly> outputs;
  std::uint32_t total_degree = 0;
  std::size_t term_count = 0;

  friend bool operator==(const ExpandedNetworkPoly&,
                         const ExpandedNetworkPoly&) = default;
};

struct ExpandOptions {
  PolyLimits limits;
  // Compare against EvalNested on random points after expanding.
  bool self_check = true;
  std::size_t check_points = 100;
  Interval check_interval{0.0, 1.0};
  double check_tolerance = 1e-6;
  std::uint64_t seed = 1;
};

// Upper bound on the number of monomials of the largest node polynomial,
// computed from degrees alone. Saturates at SIZE_MAX.
std::size_t EstimateExpandedTerms(const PolyProgram& program);

ExpandedNetworkPoly Expand(const PolyProgram& program,
                           const ExpandOptions& options = {});

std::vector<double> EvalExpanded(const ExpandedNetworkPoly& poly,
                                 std::span<const double> x);

// Adds counts[i] pseudo-units to the i-th hidden dense layer at seeded random
// positions. Incoming weights and bias are uniform in [-1, 1]; every outgoing
// weight is zero.
ModelGraph InsertPseudoUnits(const ModelGraph& model,
                             std::span<const std::size_t> counts,
                             std::uint64_t seed);

// Indices of the layers InsertPseudoUnits accepts counts for.
std::vector<std::size_t> HiddenDenseLayers(const ModelGraph& model);

}  // namespace polydnn

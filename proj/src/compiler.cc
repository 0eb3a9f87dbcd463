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

#include "polydnn/compiler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

double OperandValue(const Operand& op, std::span<const double> x,
                    const std::vector<double>& values) {
  return op.source == Operand::Source::kInput ? x[op.index] : values[op.index];
}

struct ProgramBuilder {
  PolyProgram program;

  std::size_t Add(PolyNode node) {
    node.id = program.nodes.size();
    program.nodes.push_back(std::move(node));
    return program.nodes.back().id;
  }
};

Operand Ref(const std::vector<Operand>& prev, std::size_t i, double weight) {
  Operand op = prev[i];
  op.weight = weight;
  return op;
}

// Lowers max over `set` to a right fold of pairwise-max nodes.
std::size_t LowerMaxChain(ProgramBuilder& builder,
                          const std::vector<Operand>& prev,
                          const std::vector<std::size_t>& set,
                          const MaxApproximator& approx, std::size_t layer,
                          std::size_t unit) {
  PolyNode node;
  node.layer = layer;
  node.unit = unit;
  if (set.size() == 1) {
    node.inputs = {Ref(prev, set[0], 1.0)};
    return builder.Add(std::move(node));
  }
  Operand acc = Ref(prev, set.back(), 1.0);
  for (std::size_t k = set.size() - 1; k-- > 0;) {
    const Operand x = Ref(prev, set[k], 1.0);
    PolyNode pair;
    pair.layer = layer;
    pair.unit = unit;
    pair.inputs = {x, acc};
    pair.inputs[1].weight = -1.0;
    pair.activation = approx.DifferencePoly();
    pair.linear = {x, acc};
    pair.linear[0].weight = 0.5;
    pair.linear[1].weight = 0.5;
    pair.is_helper = k != 0;
    acc = Operand{Operand::Source::kNode, builder.Add(std::move(pair)), 1.0};
  }
  return acc.index;
}

// Binomial(n + d, d) with saturation.
std::size_t MonomialBound(std::size_t num_vars, std::uint64_t degree) {
  long double bound = 1.0L;
  for (std::uint64_t i = 1; i <= degree; ++i) {
    bound = bound * static_cast<long double>(num_vars + i) /
            static_cast<long double>(i);
    if (bound > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
      return std::numeric_limits<std::size_t>::max();
    }
  }
  return static_cast<std::size_t>(std::llround(bound));
}

std::vector<std::uint64_t> NodeDegrees(const PolyProgram& program) {
  std::vector<std::uint64_t> deg(program.nodes.size(), 0);
  auto operand_degree = [&](const Operand& op) -> std::uint64_t {
    if (op.weight == 0.0) return 0;
    return op.source == Operand::Source::kInput ? 1 : deg[op.index];
  };
  for (const auto& node : program.nodes) {
    std::uint64_t inner = 0;
    for (const auto& op : node.inputs) inner = std::max(inner, operand_degree(op));
    std::uint64_t d = node.activation.IsIdentity()
                          ? inner
                          : static_cast<std::uint64_t>(node.activation.degree()) * inner;
    if (inner == 0) d = 0;
    for (const auto& op : node.linear) d = std::max(d, operand_degree(op));
    deg[node.id] = d;
  }
  return deg;
}

}  // namespace

std::string_view SoftmaxModeName(SoftmaxMode mode) {
  return mode == SoftmaxMode::kDropArgmax ? "drop" : "none";
}

SoftmaxMode ParseSoftmaxMode(std::string_view name) {
  if (name == "drop" || name == "drop_argmax") return SoftmaxMode::kDropArgmax;
  if (name == "none") return SoftmaxMode::kNone;
  throw ParseError("unknown softmax mode '" + std::string(name) + "'");
}

std::size_t PolyProgram::unit_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const PolyNode& n) { return !n.is_helper; }));
}

void Validate(const PolyProgram& program) {
  std::vector<bool> has_nonzero_out(program.nodes.size(), false);
  for (std::size_t i = 0; i < program.nodes.size(); ++i) {
    const auto& node = program.nodes[i];
    if (node.id != i) {
      throw ValidationError("program node " + std::to_string(i) +
                            " has id " + std::to_string(node.id));
    }
    for (const auto* ops : {&node.inputs, &node.linear}) {
      for (const auto& op : *ops) {
        const bool ok = op.source == Operand::Source::kInput
                            ? op.index < program.input_width
                            : op.index < i;
        if (!ok) {
          throw ValidationError("program node " + std::to_string(i) +
                                " references operand " +
                                std::to_string(op.index) +
                                " out of topological order");
        }
        if (op.source == Operand::Source::kNode && op.weight != 0.0) {
          has_nonzero_out[op.index] = true;
        }
      }
    }
  }
  for (std::size_t id : program.output_node_ids) {
    if (id >= program.nodes.size()) {
      throw ValidationError("output node " + std::to_string(id) + " missing");
    }
  }
  for (const auto& node : program.nodes) {
    if (node.is_pseudo && has_nonzero_out[node.id]) {
      throw ValidationError("pseudo node " + std::to_string(node.id) +
                            " has a nonzero outgoing weight");
    }
  }
}

PolyProgram CompileNested(const ModelGraph& model, const CompileOptions& options) {
  Validate(model);
  if (model.HasBatchNorm()) {
    throw ValidationError("model has batchnorm layers; fold them first");
  }
  if (options.intervals.size() != model.layers.size()) {
    throw ValidationError("need one interval radius per layer: got " +
                          std::to_string(options.intervals.size()) + " for " +
                          std::to_string(model.layers.size()) + " layers");
  }
  ProgramBuilder builder;
  builder.program.input_width = model.input_width;
  builder.program.softmax_mode = options.softmax_mode;
  builder.program.degree = options.degree;
  builder.program.intervals = options.intervals;

  std::vector<Operand> prev;
  for (std::size_t i = 0; i < model.input_width; ++i) {
    prev.push_back({Operand::Source::kInput, i, 1.0});
  }

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    const double radius = options.intervals[l];
    LayerReport report;
    report.layer = l;
    report.kind = layer.kind;
    report.activation = layer.activation;
    report.radius = radius;
    report.fit.interval = {-radius, radius};
    report.degree = 1;

    std::vector<Operand> current;
    auto emit = [&](PolyNode node) {
      node.layer = l;
      current.push_back({Operand::Source::kNode, builder.Add(std::move(node)), 1.0});
    };

    if (layer.kind == LayerKind::kSoftmaxOutput &&
        options.softmax_mode == SoftmaxMode::kNone) {
      throw UnsupportedError("layer " + std::to_string(l) +
                             ": softmax is not polynomial; use softmax mode "
                             "drop");
    }

    switch (layer.kind) {
      case LayerKind::kDense:
      case LayerKind::kConv2D:
      case LayerKind::kSoftmaxOutput: {
        UniPoly act = UniPoly::Identity();
        if (layer.activation != ActivationKind::kIdentity) {
          auto fitted = ApproximateActivation(
              layer.activation, {options.degree, radius, options.sqrt_degree},
              options.limits);
          act = std::move(fitted.poly);
          report.fit = fitted.report;
          report.degree = act.degree();
        }
        for (std::size_t j = 0; j < layer.width; ++j) {
          PolyNode node;
          node.unit = j;
          const auto inputs = layer.Inputs(j);
          for (std::size_t i = 0; i < inputs.size(); ++i) {
            node.inputs.push_back(Ref(prev, inputs[i], layer.weights[j][i]));
          }
          node.bias = layer.bias[j];
          node.activation = act;
          emit(std::move(node));
        }
        break;
      }
      case LayerKind::kMeanPool:
      case LayerKind::kMaxPool: {
        PoolMode mode = options.pool_mode != PoolMode::kUnset ? options.pool_mode
                                                              : layer.pool_mode;
        if (layer.kind == LayerKind::kMeanPool) mode = PoolMode::kMean;
        if (mode == PoolMode::kUnset) {
          throw ValidationError("layer " + std::to_string(l) +
                                ": pool mode unset for maxpool");
        }
        if (mode == PoolMode::kMean) {
          for (std::size_t j = 0; j < layer.width; ++j) {
            PolyNode node;
            node.unit = j;
            const auto& set = layer.connectivity[j];
            for (std::size_t i : set) {
              node.inputs.push_back(
                  Ref(prev, i, 1.0 / static_cast<double>(set.size())));
            }
            emit(std::move(node));
          }
          break;
        }
        const MaxApproximator approx(MaxMode::kPolySqrt, radius,
                                     options.sqrt_degree, options.limits);
        report.fit = approx.SqrtReport();
        report.degree = approx.DifferencePoly().degree();
        for (std::size_t j = 0; j < layer.width; ++j) {
          const std::size_t id = LowerMaxChain(builder, prev, layer.connectivity[j],
                                               approx, l, j);
          current.push_back({Operand::Source::kNode, id, 1.0});
        }
        break;
      }
      case LayerKind::kBatchNorm:
        break;  // rejected above
    }
    report.nodes = current.size();
    builder.program.reports.push_back(report);
    prev = std::move(current);
  }

  auto& program = builder.program;
  for (const auto& op : prev) program.output_node_ids.push_back(op.index);

  // A non-output node whose outgoing weights are all zero is a pseudo node.
  std::vector<bool> live(program.nodes.size(), false);
  for (const auto& node : program.nodes) {
    for (const auto* ops : {&node.inputs, &node.linear}) {
      for (const auto& op : *ops) {
        if (op.source == Operand::Source::kNode && op.weight != 0.0) {
          live[op.index] = true;
        }
      }
    }
  }
  for (std::size_t id : program.output_node_ids) live[id] = true;
  for (auto& node : program.nodes) node.is_pseudo = !live[node.id];

  Validate(program);
  return program;
}

NestedResult EvalNested(const PolyProgram& program, std::span<const double> x,
                        OpCounts* counts) {
  if (x.size() != program.input_width) {
    throw ValidationError("input has width " + std::to_string(x.size()) +
                          ", program expects " +
                          std::to_string(program.input_width));
  }
  NestedResult result;
  std::vector<double> values(program.nodes.size(), 0.0);
  result.evaluations.assign(program.nodes.size(), 0);
  for (const auto& node : program.nodes) {
    double s = 0.0;
    for (const auto& op : node.inputs) s += op.weight * OperandValue(op, x, values);
    s += node.bias;
    double v = node.activation.IsIdentity() ? s : node.activation(s);
    for (const auto& op : node.linear) v += op.weight * OperandValue(op, x, values);
    values[node.id] = v;
    ++result.evaluations[node.id];
    if (counts != nullptr) {
      counts->mul += node.inputs.size() + node.linear.size();
      counts->add += node.inputs.size() + node.linear.size();
      if (!node.activation.IsIdentity()) {
        const auto d = static_cast<std::uint64_t>(node.activation.degree());
        counts->mul += d;
        counts->add += d;
      }
    }
  }
  for (std::size_t id : program.output_node_ids) {
    result.outputs.push_back(values[id]);
  }
  result.predicted_class = Argmax(result.outputs);
  return result;
}

std::size_t EstimateExpandedTerms(const PolyProgram& program) {
  std::size_t worst = 0;
  for (std::uint64_t d : NodeDegrees(program)) {
    worst = std::max(worst, MonomialBound(program.input_width, d));
  }
  return worst;
}

ExpandedNetworkPoly Expand(const PolyProgram& program,
                           const ExpandOptions& options) {
  Validate(program);
  const auto& limits = options.limits;
  const auto degrees = NodeDegrees(program);
  for (std::size_t id : program.output_node_ids) {
    if (degrees[id] > static_cast<std::uint64_t>(limits.degree_cap)) {
      throw ExpansionTooLargeError(
          "expanded degree " + std::to_string(degrees[id]) +
          " exceeds degree cap " + std::to_string(limits.degree_cap) +
          "; evaluate in nested mode instead");
    }
  }
  const std::size_t estimate = EstimateExpandedTerms(program);
  if (estimate > limits.term_cap) {
    throw ExpansionTooLargeError(
        "expansion may need up to " +
        (estimate == std::numeric_limits<std::size_t>::max()
             ? std::string("an astronomical number of")
             : std::to_string(estimate)) +
        " terms per node, above the cap of " + std::to_string(limits.term_cap) +
        "; evaluate in nested mode instead");
  }

  const std::size_t n = program.input_width;
  std::vector<SparseMultiPoly> polys(program.nodes.size(), SparseMultiPoly(n));
  auto operand_poly = [&](const Operand& op) {
    return op.source == Operand::Source::kInput
               ? SparseMultiPoly::Variable(n, op.index)
               : polys[op.index];
  };
  for (const auto& node : program.nodes) {
    SparseMultiPoly q = SparseMultiPoly::Constant(n, node.bias);
    for (const auto& op : node.inputs) {
      if (op.weight == 0.0) continue;
      q = Add(q, ScaleBy(operand_poly(op), op.weight, limits), limits);
    }
    SparseMultiPoly p = Compose(node.activation, q, limits);
    for (const auto& op : node.linear) {
      if (op.weight == 0.0) continue;
      p = Add(p, ScaleBy(operand_poly(op), op.weight, limits), limits);
    }
    polys[node.id] = std::move(p);
  }

  ExpandedNetworkPoly out;
  out.input_width = n;
  for (std::size_t id : program.output_node_ids) {
    out.total_degree = std::max(out.total_degree, polys[id].total_degree());
    out.term_count += polys[id].term_count();
    out.outputs.push_back(polys[id]);
  }

  if (options.self_check) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(options.check_interval.lo,
                                                options.check_interval.hi);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < options.check_points; ++t) {
      for (double& v : x) v = dist(rng);
      const auto nested = EvalNested(program, x).outputs;
      const auto expanded = EvalExpanded(out, x);
      for (std::size_t o = 0; o < nested.size(); ++o) {
        const double diff = std::abs(expanded[o] - nested[o]);
        if (diff > options.check_tolerance * (1.0 + std::abs(nested[o]))) {
          throw ValidationError(
              "expansion self-check failed: output " + std::to_string(o) +
              " differs from nested evaluation by " + std::to_string(diff));
        }
      }
    }
  }
  return out;
}

std::vector<double> EvalExpanded(const ExpandedNetworkPoly& poly,
                                 std::span<const double> x) {
  if (x.size() != poly.input_width) {
    throw ValidationError("input has width " + std::to_string(x.size()) +
                          ", polynomial expects " +
                          std::to_string(poly.input_width));
  }
  std::vector<double> out;
  for (const auto& p : poly.outputs) out.push_back(p.Evaluate(x));
  return out;
}

std::vector<std::size_t> HiddenDenseLayers(const ModelGraph& model) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    if (model.layers[l].kind == LayerKind::kDense) out.push_back(l);
  }
  return out;
}

namespace {

// Re-indexes consumers of a layer whose units moved to new slots.
void RemapConsumer(ModelGraph& model, std::size_t index,
                   const std::vector<std::size_t>& old_to_new,
                   const std::vector<bool>& pseudo_slot) {
  Layer& layer = model.layers[index];
  const std::size_t new_width = pseudo_slot.size();
  layer.input_width = new_width;
  switch (layer.kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxOutput:
      for (auto& row : layer.weights) {
        std::vector<double> wide(new_width, 0.0);
        for (std::size_t i = 0; i < row.size(); ++i) wide[old_to_new[i]] = row[i];
        row = std::move(wide);
      }
      break;
    case LayerKind::kConv2D:
    case LayerKind::kMaxPool:
    case LayerKind::kMeanPool:
      for (auto& set : layer.connectivity) {
        for (auto& i : set) i = old_to_new[i];
      }
      break;
    case LayerKind::kBatchNorm: {
      auto widen = [&](std::vector<double>& v, double fill) {
        std::vector<double> wide(new_width, fill);
        for (std::size_t i = 0; i < v.size(); ++i) wide[old_to_new[i]] = v[i];
        v = std::move(wide);
      };
      widen(layer.bn->gamma, 1.0);
      widen(layer.bn->beta, 0.0);
      widen(layer.bn->mean, 0.0);
      widen(layer.bn->var, 1.0);
      layer.width = new_width;
      RemapConsumer(model, index + 1, old_to_new, pseudo_slot);
      break;
    }
  }
}

}  // namespace

ModelGraph InsertPseudoUnits(const ModelGraph& model,
                             std::span<const std::size_t> counts,
                             std::uint64_t seed) {
  Validate(model);
  const auto hidden = HiddenDenseLayers(model);
  if (counts.size() != hidden.size()) {
    throw ValidationError("expected " + std::to_string(hidden.size()) +
                          " pseudo-unit counts (one per hidden dense layer), "
                          "got " + std::to_string(counts.size()));
  }
  ModelGraph out = model;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  for (std::size_t h = 0; h < hidden.size(); ++h) {
    if (counts[h] == 0) continue;
    Layer& layer = out.layers[hidden[h]];
    const std::size_t new_width = layer.width + counts[h];
    std::vector<std::size_t> slots(new_width);
    for (std::size_t i = 0; i < new_width; ++i) slots[i] = i;
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<bool> pseudo_slot(new_width, false);
    for (std::size_t i = 0; i < counts[h]; ++i) pseudo_slot[slots[i]] = true;

    std::vector<std::size_t> old_to_new;
    std::vector<std::vector<double>> weights;
    std::vector<double> bias;
    for (std::size_t slot = 0, old = 0; slot < new_width; ++slot) {
      if (pseudo_slot[slot]) {
        std::vector<double> row(layer.input_width);
        for (double& w : row) w = weight(rng);
        weights.push_back(std::move(row));
        bias.push_back(weight(rng));
      } else {
        old_to_new.push_back(slot);
        weights.push_back(layer.weights[old]);
        bias.push_back(layer.bias[old]);
        ++old;
      }
    }
    layer.weights = std::move(weights);
    layer.bias = std::move(bias);
    layer.width = new_width;
    RemapConsumer(out, hidden[h] + 1, old_to_new, pseudo_slot);
  }
  Validate(out);
  return out;
}

}  // namespace polydnn

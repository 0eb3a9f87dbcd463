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

#include "polydnn/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

std::string LayerTag(std::size_t index) {
  return "layer " + std::to_string(index);
}

void Require(bool ok, std::size_t index, const std::string& what) {
  if (!ok) throw ValidationError(LayerTag(index) + ": " + what);
}

void ValidateLayer(const Layer& layer, std::size_t index,
                   std::size_t expected_input) {
  Require(layer.input_width == expected_input, index,
          "input width " + std::to_string(layer.input_width) +
              " does not match predecessor width " +
              std::to_string(expected_input));
  Require(layer.width > 0, index, "width must be positive");
  switch (layer.kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxOutput:
      Require(layer.weights.size() == layer.width, index,
              "weights has " + std::to_string(layer.weights.size()) +
                  " rows, expected " + std::to_string(layer.width));
      for (std::size_t j = 0; j < layer.weights.size(); ++j) {
        Require(layer.weights[j].size() == layer.input_width, index,
                "weights row " + std::to_string(j) + " has length " +
                    std::to_string(layer.weights[j].size()) +
                    ", predecessor width is " +
                    std::to_string(layer.input_width));
      }
      Require(layer.bias.size() == layer.width, index,
              "bias length does not match width");
      if (layer.kind == LayerKind::kSoftmaxOutput) {
        Require(layer.activation == ActivationKind::kIdentity, index,
                "softmax output layer takes no activation");
      }
      break;
    case LayerKind::kConv2D:
      Require(layer.connectivity.size() == layer.width, index,
              "connectivity must list one index set per unit");
      Require(layer.weights.size() == layer.width, index,
              "weights must list one row per unit");
      Require(layer.bias.size() == layer.width, index,
              "bias length does not match width");
      for (std::size_t j = 0; j < layer.width; ++j) {
        Require(layer.weights[j].size() == layer.connectivity[j].size(), index,
                "weights row " + std::to_string(j) +
                    " not aligned with its connectivity set");
      }
      break;
    case LayerKind::kMaxPool:
    case LayerKind::kMeanPool:
      Require(layer.connectivity.size() == layer.width, index,
              "connectivity must list one index set per unit");
      Require(layer.weights.empty() && layer.bias.empty(), index,
              "pooling layers carry no weights");
      Require(layer.activation == ActivationKind::kIdentity, index,
              "pooling layers take no activation");
      break;
    case LayerKind::kBatchNorm: {
      Require(layer.bn.has_value(), index, "batchnorm layer missing bn");
      Require(layer.width == layer.input_width, index,
              "batchnorm must preserve width");
      const auto& bn = *layer.bn;
      for (const auto* v : {&bn.gamma, &bn.beta, &bn.mean, &bn.var}) {
        Require(v->size() == layer.width, index,
                "bn parameter vector length does not match width");
      }
      for (double var : bn.var) {
        Require(var > 0.0 && std::isfinite(var), index,
                "bn variance must be positive");
      }
      break;
    }
  }
  for (std::size_t j = 0; j < layer.connectivity.size(); ++j) {
    const auto& set = layer.connectivity[j];
    Require(!set.empty(), index,
            "connectivity set " + std::to_string(j) + " is empty");
    for (std::size_t i : set) {
      Require(i < layer.input_width, index,
              "connectivity set " + std::to_string(j) + " references unit " +
                  std::to_string(i) + " outside predecessor width " +
                  std::to_string(layer.input_width));
    }
  }
}

// y = scale * x + shift for a BatchNorm unit.
struct AffineNorm {
  std::vector<double> scale;
  std::vector<double> shift;
};

AffineNorm NormAsAffine(const BatchNormParams& bn) {
  AffineNorm out;
  for (std::size_t j = 0; j < bn.gamma.size(); ++j) {
    const double s = bn.gamma[j] / std::sqrt(bn.var[j]);
    out.scale.push_back(s);
    out.shift.push_back(bn.beta[j] - s * bn.mean[j]);
  }
  return out;
}

double ApplyNorm(const BatchNormParams& bn, std::size_t j, double x) {
  return bn.gamma[j] * (x - bn.mean[j]) / std::sqrt(bn.var[j]) + bn.beta[j];
}

void CountActivation(ActivationKind kind, OpCounts* counts) {
  if (counts == nullptr) return;
  switch (kind) {
    case ActivationKind::kReLU:
      counts->cmp += 1;
      break;
    case ActivationKind::kLeakyReLU:
      counts->cmp += 1;
      counts->mul += 1;
      break;
    case ActivationKind::kSigmoid:
    case ActivationKind::kTanh:
      counts->other += 2;
      counts->add += 1;
      break;
    case ActivationKind::kIdentity:
      break;
  }
}

// Runs one layer, recording the values fed to its nonlinearity.
std::vector<double> ForwardLayer(const Layer& layer,
                                 const std::vector<double>& in,
                                 std::vector<double>* pre_activation,
                                 OpCounts* counts) {
  std::vector<double> out(layer.width);
  switch (layer.kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxOutput:
    case LayerKind::kConv2D:
      for (std::size_t j = 0; j < layer.width; ++j) {
        const auto& row = layer.weights[j];
        double s = 0.0;
        if (layer.kind == LayerKind::kConv2D) {
          const auto& set = layer.connectivity[j];
          for (std::size_t i = 0; i < set.size(); ++i) s += row[i] * in[set[i]];
        } else {
          for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * in[i];
        }
        s += layer.bias[j];
        if (counts != nullptr) {
          counts->mul += row.size();
          counts->add += row.size();
        }
        if (pre_activation != nullptr) pre_activation->push_back(s);
        out[j] = Activate(layer.activation, s);
        CountActivation(layer.activation, counts);
      }
      break;
    case LayerKind::kMaxPool:
    case LayerKind::kMeanPool:
      for (std::size_t j = 0; j < layer.width; ++j) {
        const auto& set = layer.connectivity[j];
        double acc = layer.kind == LayerKind::kMaxPool ? in[set[0]] : 0.0;
        for (std::size_t k = 0; k < set.size(); ++k) {
          const double v = in[set[k]];
          if (pre_activation != nullptr) pre_activation->push_back(v);
          if (layer.kind == LayerKind::kMaxPool) {
            acc = std::max(acc, v);
          } else {
            acc += v;
          }
        }
        if (layer.kind == LayerKind::kMeanPool) {
          acc /= static_cast<double>(set.size());
        }
        if (counts != nullptr) {
          if (layer.kind == LayerKind::kMaxPool) {
            counts->cmp += set.size() - 1;
          } else {
            counts->add += set.size() - 1;
            counts->other += 1;
          }
        }
        out[j] = acc;
      }
      break;
    case LayerKind::kBatchNorm:
      for (std::size_t j = 0; j < layer.width; ++j) {
        const double s = ApplyNorm(*layer.bn, j, in[j]);
        if (counts != nullptr) {
          counts->add += 2;
          counts->mul += 1;
          counts->other += 2;
        }
        if (pre_activation != nullptr) pre_activation->push_back(s);
        out[j] = Activate(layer.activation, s);
        CountActivation(layer.activation, counts);
      }
      break;
  }
  return out;
}

void CheckInputWidth(const ModelGraph& model, std::span<const double> x) {
  if (x.size() != model.input_width) {
    throw ValidationError("input has width " + std::to_string(x.size()) +
                          ", model expects " +
                          std::to_string(model.input_width));
  }
}

}  // namespace

double Activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::kReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::kLeakyReLU:
      return x > 0.0 ? x : kLeakySlope * x;
    case ActivationKind::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::kTanh:
      return std::tanh(x);
    case ActivationKind::kIdentity:
      return x;
  }
  return x;
}

std::string_view ActivationName(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kReLU:
      return "relu";
    case ActivationKind::kLeakyReLU:
      return "leaky_relu";
    case ActivationKind::kSigmoid:
      return "sigmoid";
    case ActivationKind::kTanh:
      return "tanh";
    case ActivationKind::kIdentity:
      return "identity";
  }
  return "identity";
}

ActivationKind ParseActivation(std::string_view name) {
  for (auto kind : {ActivationKind::kReLU, ActivationKind::kLeakyReLU,
                    ActivationKind::kSigmoid, ActivationKind::kTanh,
                    ActivationKind::kIdentity}) {
    if (ActivationName(kind) == name) return kind;
  }
  throw ParseError("unknown activation '" + std::string(name) + "'");
}

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kConv2D:
      return "conv2d";
    case LayerKind::kMaxPool:
      return "maxpool";
    case LayerKind::kMeanPool:
      return "meanpool";
    case LayerKind::kBatchNorm:
      return "batchnorm";
    case LayerKind::kSoftmaxOutput:
      return "softmax";
  }
  return "dense";
}

LayerKind ParseLayerKind(std::string_view name) {
  for (auto kind : {LayerKind::kDense, LayerKind::kConv2D, LayerKind::kMaxPool,
                    LayerKind::kMeanPool, LayerKind::kBatchNorm,
                    LayerKind::kSoftmaxOutput}) {
    if (LayerKindName(kind) == name) return kind;
  }
  throw ParseError("unknown layer kind '" + std::string(name) + "'");
}

std::vector<std::size_t> Layer::Inputs(std::size_t j) const {
  switch (kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxOutput: {
      std::vector<std::size_t> all(input_width);
      for (std::size_t i = 0; i < input_width; ++i) all[i] = i;
      return all;
    }
    case LayerKind::kBatchNorm:
      return {j};
    default:
      return connectivity[j];
  }
}

std::vector<std::size_t> ModelGraph::widths() const {
  std::vector<std::size_t> out;
  for (const auto& layer : layers) out.push_back(layer.width);
  return out;
}

bool ModelGraph::HasBatchNorm() const {
  return std::any_of(layers.begin(), layers.end(), [](const Layer& l) {
    return l.kind == LayerKind::kBatchNorm;
  });
}

void Validate(const ModelGraph& model) {
  if (model.input_width == 0) {
    throw ValidationError("input_width must be positive");
  }
  if (model.layers.empty()) throw ValidationError("model has no layers");
  std::size_t width = model.input_width;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    ValidateLayer(model.layers[l], l, width);
    width = model.layers[l].width;
  }
  const Layer& last = model.layers.back();
  const bool logit_output = last.kind == LayerKind::kDense &&
                            last.activation == ActivationKind::kIdentity;
  if (last.kind != LayerKind::kSoftmaxOutput && !logit_output) {
    throw ValidationError(LayerTag(model.layers.size() - 1) +
                          ": last layer must be softmax or identity dense");
  }
}

ModelGraph FoldBatchNorm(const ModelGraph& model) {
  Validate(model);
  ModelGraph out = model;
  out.layers.clear();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    if (layer.kind != LayerKind::kBatchNorm) {
      out.layers.push_back(layer);
      continue;
    }
    const AffineNorm norm = NormAsAffine(*layer.bn);
    Layer* prev = out.layers.empty() ? nullptr : &out.layers.back();
    if (prev != nullptr &&
        (prev->kind == LayerKind::kDense || prev->kind == LayerKind::kConv2D) &&
        prev->activation == ActivationKind::kIdentity) {
      // Fold into the producer: s * (w.x + b) + t.
      for (std::size_t j = 0; j < prev->width; ++j) {
        for (double& w : prev->weights[j]) w *= norm.scale[j];
        prev->bias[j] = norm.scale[j] * prev->bias[j] + norm.shift[j];
      }
      prev->activation = layer.activation;
      continue;
    }
    const bool has_next = l + 1 < model.layers.size();
    if (has_next && model.layers[l + 1].IsWeighted() &&
        layer.activation == ActivationKind::kIdentity) {
      // Fold into the consumer: w.(s * x + t) + b.
      Layer next = model.layers[l + 1];
      for (std::size_t k = 0; k < next.width; ++k) {
        const auto inputs = next.Inputs(k);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
          next.bias[k] += next.weights[k][i] * norm.shift[inputs[i]];
          next.weights[k][i] *= norm.scale[inputs[i]];
        }
      }
      out.layers.push_back(std::move(next));
      ++l;
      continue;
    }
    throw UnsupportedError(LayerTag(l) +
                           ": batchnorm has no foldable neighbor (needs an "
                           "identity-activation dense/conv producer or an "
                           "identity batchnorm feeding a weighted layer)");
  }
  Validate(out);
  return out;
}

std::size_t Argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Inference ReferenceInfer(const ModelGraph& model, std::span<const double> x,
                         OpCounts* counts) {
  CheckInputWidth(model, x);
  std::vector<double> values(x.begin(), x.end());
  for (const Layer& layer : model.layers) {
    values = ForwardLayer(layer, values, nullptr, counts);
  }
  Inference result;
  result.logits = values;
  result.predicted_class = Argmax(values);
  if (model.layers.back().kind == LayerKind::kSoftmaxOutput) {
    const double top = values[result.predicted_class];
    double total = 0.0;
    result.probabilities.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      result.probabilities[i] = std::exp(values[i] - top);
      total += result.probabilities[i];
    }
    for (double& p : result.probabilities) p /= total;
    if (counts != nullptr) {
      counts->other += 2 * values.size();
      counts->add += 2 * values.size();
    }
  }
  return result;
}

std::vector<std::vector<double>> LayerPreActivations(
    const ModelGraph& model, std::span<const double> x) {
  CheckInputWidth(model, x);
  std::vector<std::vector<double>> pre(model.layers.size());
  std::vector<double> values(x.begin(), x.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    values = ForwardLayer(model.layers[l], values, &pre[l], nullptr);
  }
  return pre;
}

void Validate(const Dataset& data) {
  if (data.inputs.size() != data.labels.size()) {
    throw ValidationError("dataset has " + std::to_string(data.inputs.size()) +
                          " inputs but " + std::to_string(data.labels.size()) +
                          " labels");
  }
  const std::size_t width = data.input_width();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.inputs[i].size() != width) {
      throw ValidationError("dataset row " + std::to_string(i) +
                            " has ragged width");
    }
    if (data.labels[i] >= data.num_classes) {
      throw ValidationError("dataset label " + std::to_string(data.labels[i]) +
                            " at row " + std::to_string(i) +
                            " not below num_classes " +
                            std::to_string(data.num_classes));
    }
  }
}

}  // namespace polydnn

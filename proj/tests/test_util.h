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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "polydnn/compiler.h"
#include "polydnn/field.h"
#include "polydnn/harness.h"
#include "polydnn/model.h"

namespace polydnn::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(POLYDNN_TEST_DATA_DIR) + "/" + name;
}

// Random dense net: <= 4 inputs, <= 3 layers, widths <= 3, weights in [-1, 1].
inline ModelGraph RandomToyNet(std::mt19937_64& rng, bool allow_softmax = true) {
  std::uniform_int_distribution<int> width(1, 3);
  std::uniform_int_distribution<int> inputs(1, 4);
  std::uniform_int_distribution<int> layers(1, 3);
  std::uniform_int_distribution<int> act(0, 4);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  static constexpr ActivationKind kActs[] = {
      ActivationKind::kReLU, ActivationKind::kLeakyReLU, ActivationKind::kSigmoid,
      ActivationKind::kTanh, ActivationKind::kIdentity};
  ModelGraph m;
  m.name = "toy";
  m.input_width = static_cast<std::size_t>(inputs(rng));
  const int n = layers(rng);
  std::size_t prev = m.input_width;
  for (int l = 0; l < n; ++l) {
    Layer layer;
    const bool last = l == n - 1;
    layer.kind = last && allow_softmax && rng() % 2 == 0 ? LayerKind::kSoftmaxOutput
                                                          : LayerKind::kDense;
    layer.input_width = prev;
    layer.width = static_cast<std::size_t>(width(rng));
    layer.activation = last ? ActivationKind::kIdentity : kActs[act(rng)];
    for (std::size_t j = 0; j < layer.width; ++j) {
      std::vector<double> row(prev);
      for (double& v : row) v = w(rng);
      layer.weights.push_back(std::move(row));
      layer.bias.push_back(w(rng));
    }
    prev = layer.width;
    m.layers.push_back(std::move(layer));
  }
  return m;
}

inline std::vector<double> UniformInput(std::mt19937_64& rng, std::size_t n,
                                        double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

inline ProgramArtifact CompileToy(const ModelGraph& m, int degree, std::uint64_t seed) {
  CompileSettings s;
  s.degree = degree;
  s.expand = true;
  s.seed = seed;
  return CompileModel(m, nullptr, s);
}

// Reference modular arithmetic by shift-and-add; shares nothing with
// PrimeField.
inline u128 SlowMulMod(u128 a, u128 b, u128 p) {
  u128 r = 0;
  a %= p;
  b %= p;
  while (b != 0) {
    if (b & 1) r = (r >= p - a) ? r - (p - a) : r + a;
    a = (a >= p - a) ? a - (p - a) : a + a;
    b >>= 1;
  }
  return r;
}

inline u128 SlowEncode(double v, int frac_bits, u128 p) {
  // Scaling by a power of two is exact; rounding is half away from zero.
  const long double rounded =
      std::round(static_cast<long double>(v) * std::pow(2.0L, frac_bits));
  const u128 mag = static_cast<u128>(std::fabs(rounded)) % p;
  return rounded < 0 && mag != 0 ? p - mag : mag;
}

// Clear fixed-point evaluation: sum_t encode(a_t) * encode(monomial_t) mod p,
// monomials computed in double from per-variable power tables.
inline std::vector<u128> OracleFixedPoint(const ExpandedNetworkPoly& poly,
                                          const std::vector<double>& x,
                                          int field_bits, int frac_bits) {
  const u128 p = (u128{1} << field_bits) - 1;
  std::uint32_t max_exp = 0;
  for (const auto& o : poly.outputs) {
    for (const auto& [exps, c] : o.terms()) {
      for (auto e : exps) max_exp = std::max(max_exp, e);
    }
  }
  std::vector<std::vector<double>> pw(x.size(), std::vector<double>(max_exp + 1, 1.0));
  for (std::size_t v = 0; v < x.size(); ++v) {
    for (std::uint32_t e = 1; e <= max_exp; ++e) pw[v][e] = pw[v][e - 1] * x[v];
  }
  std::vector<u128> out;
  for (const auto& o : poly.outputs) {
    u128 acc = 0;
    for (const auto& [exps, c] : o.terms()) {
      double m = 1.0;
      for (std::size_t v = 0; v < exps.size(); ++v) {
        if (exps[v] != 0) m *= pw[v][exps[v]];
      }
      const u128 term = SlowMulMod(SlowEncode(c, frac_bits, p),
                                   SlowEncode(m, frac_bits, p), p);
      acc = (acc + term) % p;
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace polydnn::testing

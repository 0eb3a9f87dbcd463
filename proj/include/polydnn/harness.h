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
#include <array>
#include <optional>
#include <span>
#include <ostream>
#include <vector>

#include "polydnn/approx.h"
#include "polydnn/compiler.h"
#include "polydnn/fixed_point.h"
#include "polydnn/model.h"
#include "polydnn/mpc.h"
#include "polydnn/program_io.h"

namespace polydnn {

struct CompileSettings {
  int degree = 30;
  int sqrt_degree = 20;
  bool expand = false;
  // Spread over the hidden dense layers, earlier layers taking the remainder.
  std::size_t pseudo_units = 0;
  PoolMode pool_mode = PoolMode::kUnset;
  SoftmaxMode softmax_mode = SoftmaxMode::kDropArgmax;
  CalibrationOptions calibration;
  std::uint64_t seed = 1;
  PolyLimits limits;
};

// Without a calibration set, this many uniform [0, 1] inputs are drawn.
inline constexpr std::size_t kSyntheticCalibrationSize = 1000;

Dataset SyntheticCalibrationSet(std::size_t input_width, std::uint64_t seed,
                                std::size_t n = kSyntheticCalibrationSize);

// Radii for the folded model. Pseudo-units do not change them: calibration
// runs on the model before they are inserted.
std::vector<double> CalibrateModel(const ModelGraph& folded,
                                   const Dataset* calibration,
                                   const CompileSettings& settings);

std::vector<std::size_t> SplitPseudoUnits(const ModelGraph& model,
                                          std::size_t total);

// Fold, calibrate, optionally hide, compile, optionally expand.
ProgramArtifact CompileModel(const ModelGraph& model, const Dataset* calibration,
                             const CompileSettings& settings);

struct SweepConfig {
  std::vector<int> degrees{2, 4, 8, 16, 24, 30, 32};
  std::size_t runs = 10;
  std::size_t samples_per_run = 500;
  std::uint64_t seed = 1;
  bool with_replacement = false;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct SweepRow {
  int degree = 0;
  double agreement_mean = 0.0;
  double agreement_std = 0.0;
  double logit_diff_mean = 0.0;
  double logit_diff_std = 0.0;
  // Over every sampled input; robust to the few inputs that leave the
  // calibrated intervals.
  double logit_diff_median = 0.0;
  std::vector<double> agreement_per_run;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // ascending degree
  std::vector<double> reference_accuracy_per_run;
};

// Per-run sample indices are shared by every degree, so degrees are compared
// on the same inputs. Intervals are calibrated once on the whole dataset.
SweepReport RunSweep(const ModelGraph& model, const Dataset& data,
                     const SweepConfig& config,
                     const CompileSettings& base = {});

// Header: degree,agreement_mean,agreement_std,rel_logit_diff_mean,
// rel_logit_diff_std,rel_logit_diff_median,runs,samples
void WriteSweepCsv(std::ostream& out, const SweepReport& report,
                   const SweepConfig& config);

struct CostRow {
  int degree = 0;  // 0 marks the float reference with true activations
  OpCounts ops;
  double seconds_per_inference = 0.0;
};

struct CostProfile {
  std::vector<CostRow> rows;  // reference first, then ascending degree
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares fit y = a + b x; returns {a, b, r^2}.
std::array<double, 3> LinearFit(std::span<const double> x,
                                std::span<const double> y);

CostProfile ProfileCost(const ModelGraph& model, std::span<const int> degrees,
                        const Dataset* calibration,
                        const CompileSettings& base = {},
                        std::size_t timing_repeats = 20);

// Header: degree,mul,add,cmp,other,total,seconds_per_inference
// followed by a "# fit" comment line with slope, intercept and r2.
void WriteCostCsv(std::ostream& out, const CostProfile& profile);

// Clear fixed-point evaluation of the expanded program, computed the way the
// parties compute it but with unshared coefficients.
std::vector<Fx2> ClearFixedPointEval(const ExpandedNetworkPoly& poly,
                                     std::span<const double> x,
                                     const FixedPointParams& params);

}  // namespace polydnn

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

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "polydnn/model.h"
#include "polydnn/polyalg.h"

namespace polydnn {

// Number of uniform points used to measure fit errors.
inline constexpr std::size_t kFitGridPoints = 10'001;

struct FitReport {
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  std::size_t grid_points = 0;
  Interval interval;
};

struct ChebFit {
  ChebSeries series;
  FitReport report;
};

// Chebyshev interpolant through the degree + 1 Chebyshev points of the first
// kind on `interval`, with errors measured on a uniform grid.
ChebFit FitChebyshev(const std::function<double(double)>& f, int degree,
                     Interval interval, const PolyLimits& limits = {},
                     std::size_t grid_points = kFitGridPoints);

struct ApproxSpec {
  int degree = 30;
  double radius = 8.0;  // fit on [-radius, radius]
  int sqrt_degree = 20;
};

struct FittedActivation {
  UniPoly poly;
  FitReport report;
};

// Identity is returned exactly as x with a zero-error report.
FittedActivation ApproximateActivation(ActivationKind kind,
                                       const ApproxSpec& spec,
                                       const PolyLimits& limits = {});

enum class MaxMode {
  kExactAbs,      // (x + y)/2 + |x - y|/2
  kPolySqrt,      // as above with sqrt replaced by a Chebyshev fit
  kPaperLiteral,  // (x + y)/2 + sqrt((x - y)^2), without the 1/2
};

// Pairwise max in one of three modes. For kPolySqrt the square root is fit on
// [0, (2R)^2] at construction.
class MaxApproximator {
 public:
  explicit MaxApproximator(MaxMode mode, double radius = 8.0,
                           int sqrt_degree = 20, const PolyLimits& limits = {});

  MaxMode mode() const { return mode_; }
  double radius() const { return radius_; }

  double Pair(double x, double y) const;
  // Right fold: max(x1, max(x2, ...)).
  double Chain(std::span<const double> xs) const;

  // g(u) = sqrt_fit(u^2) / 2, so that max(x, y) ~ (x + y)/2 + g(x - y).
  // Only valid for kPolySqrt.
  const UniPoly& DifferencePoly() const;
  // The approximation as a polynomial in two variables (x, y).
  SparseMultiPoly AsBivariate(const PolyLimits& limits = {}) const;
  const FitReport& SqrtReport() const;
  // Bound on |Pair(x, y) - max(x, y)| for in-domain inputs.
  double PairErrorBound() const;

  // Calls to Pair with (x - y)^2 outside the fitted sqrt domain.
  std::size_t extrapolations() const { return extrapolations_->load(); }

 private:
  MaxMode mode_;
  double radius_;
  UniPoly sqrt_poly_;
  UniPoly difference_poly_;
  FitReport sqrt_report_;
  std::shared_ptr<std::atomic<std::size_t>> extrapolations_;
};

// (sum_i x_i^d)^(1/d). d == 1 gives the plain sum (mean without division);
// other odd d throw ValidationError.
double PowerMeanMax(std::span<const double> xs, int d);

struct CalibrationOptions {
  double percentile = 99.5;
  double safety_factor = 1.25;
  double floor = 1.0;
};

// Per-layer interval radius R_l: the percentile of |pre-activation| over the
// sample, times the safety factor, never below the floor.
std::vector<double> CalibrateIntervals(const ModelGraph& model,
                                       const Dataset& sample,
                                       const CalibrationOptions& options = {});

}  // namespace polydnn

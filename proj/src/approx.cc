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

#include "polydnn/approx.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {

ChebFit FitChebyshev(const std::function<double(double)>& f, int degree,
                     Interval interval, const PolyLimits& limits,
                     std::size_t grid_points) {
  if (degree < 0 || degree > limits.degree_cap) {
    throw ValidationError("fit degree " + std::to_string(degree) +
                          " outside [0, " + std::to_string(limits.degree_cap) +
                          "]");
  }
  if (!(interval.lo < interval.hi)) {
    throw ValidationError("fit interval must satisfy lo < hi");
  }
  const std::size_t n = static_cast<std::size_t>(degree) + 1;
  const double mid = 0.5 * (interval.lo + interval.hi);
  const double half = 0.5 * (interval.hi - interval.lo);

  std::vector<double> theta(n), values(n);
  for (std::size_t k = 0; k < n; ++k) {
    theta[k] = std::numbers::pi * (static_cast<double>(k) + 0.5) /
               static_cast<double>(n);
    const double x = mid + half * std::cos(theta[k]);
    values[k] = f(x);
    if (!std::isfinite(values[k])) {
      throw ValidationError("function is not finite at x = " +
                            std::to_string(x));
    }
  }
  std::vector<double> coeffs(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += values[k] * std::cos(static_cast<double>(j) * theta[k]);
    }
    coeffs[j] = 2.0 * sum / static_cast<double>(n);
  }
  coeffs[0] *= 0.5;

  ChebSeries series(std::move(coeffs), interval);
  FitReport report;
  report.interval = interval;
  report.grid_points = std::max<std::size_t>(grid_points, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < report.grid_points; ++i) {
    const double x = interval.lo + interval.width() * static_cast<double>(i) /
                                       static_cast<double>(report.grid_points - 1);
    const double want = f(x);
    if (!std::isfinite(want)) {
      throw ValidationError("function is not finite at x = " +
                            std::to_string(x));
    }
    const double err = std::abs(series(x) - want);
    report.max_abs_error = std::max(report.max_abs_error, err);
    total += err;
  }
  report.mean_abs_error = total / static_cast<double>(report.grid_points);
  return {std::move(series), report};
}

FittedActivation ApproximateActivation(ActivationKind kind,
                                       const ApproxSpec& spec,
                                       const PolyLimits& limits) {
  if (spec.degree < 1) throw ValidationError("approximation degree must be >= 1");
  if (!(spec.radius > 0.0)) {
    throw ValidationError("approximation radius must be positive");
  }
  const Interval interval{-spec.radius, spec.radius};
  if (kind == ActivationKind::kIdentity) {
    FitReport report;
    report.interval = interval;
    report.grid_points = kFitGridPoints;
    return {UniPoly::Identity(), report};
  }
  auto fit = FitChebyshev([kind](double x) { return Activate(kind, x); },
                          spec.degree, interval, limits);
  return {ChebToMonomial(fit.series, limits), fit.report};
}

MaxApproximator::MaxApproximator(MaxMode mode, double radius, int sqrt_degree,
                                 const PolyLimits& limits)
    : mode_(mode),
      radius_(radius),
      extrapolations_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (mode_ != MaxMode::kPolySqrt) return;
  if (!(radius > 0.0)) throw ValidationError("max radius must be positive");
  const double domain = 4.0 * radius * radius;
  auto fit = FitChebyshev([](double t) { return std::sqrt(std::max(t, 0.0)); },
                          sqrt_degree, Interval{0.0, domain}, limits);
  sqrt_report_ = fit.report;
  // The sqrt fit is far from smooth at 0, so its fit error dwarfs any
  // conversion error. Only require conversion to stay well below it.
  PolyLimits relaxed = limits;
  const double scale = std::max(1.0, 2.0 * radius);
  relaxed.conversion_tol =
      std::max(limits.conversion_tol, 1e-3 * fit.report.max_abs_error / scale);
  sqrt_poly_ = ChebToMonomial(fit.series, relaxed);

  std::vector<double> g(2 * sqrt_poly_.coeffs().size() - 1, 0.0);
  for (std::size_t j = 0; j < sqrt_poly_.coeffs().size(); ++j) {
    g[2 * j] = 0.5 * sqrt_poly_.coeffs()[j];
  }
  difference_poly_ = UniPoly(std::move(g));
}

double MaxApproximator::Pair(double x, double y) const {
  switch (mode_) {
    case MaxMode::kExactAbs:
      return 0.5 * (x + y) + 0.5 * std::abs(x - y);
    case MaxMode::kPaperLiteral:
      return 0.5 * (x + y) + std::sqrt((x - y) * (x - y));
    case MaxMode::kPolySqrt: {
      const double d = x - y;
      if (d * d > 4.0 * radius_ * radius_) extrapolations_->fetch_add(1);
      return 0.5 * (x + y) + difference_poly_(d);
    }
  }
  return std::max(x, y);
}

double MaxApproximator::Chain(std::span<const double> xs) const {
  if (xs.empty()) throw ValidationError("max of an empty set");
  double acc = xs.back();
  for (std::size_t i = xs.size() - 1; i-- > 0;) acc = Pair(xs[i], acc);
  return acc;
}

const UniPoly& MaxApproximator::DifferencePoly() const {
  if (mode_ != MaxMode::kPolySqrt) {
    throw ValidationError("difference polynomial only exists in poly_sqrt mode");
  }
  return difference_poly_;
}

const FitReport& MaxApproximator::SqrtReport() const {
  if (mode_ != MaxMode::kPolySqrt) {
    throw ValidationError("sqrt report only exists in poly_sqrt mode");
  }
  return sqrt_report_;
}

double MaxApproximator::PairErrorBound() const {
  switch (mode_) {
    case MaxMode::kExactAbs:
      return 0.0;
    case MaxMode::kPaperLiteral:
      return std::numeric_limits<double>::infinity();
    case MaxMode::kPolySqrt:
      // Half the sqrt fit error, plus slack for monomial conversion.
      return 0.5 * sqrt_report_.max_abs_error * (1.0 + 1e-3) + 1e-9;
  }
  return 0.0;
}

SparseMultiPoly MaxApproximator::AsBivariate(const PolyLimits& limits) const {
  const auto& g = DifferencePoly();
  SparseMultiPoly x = SparseMultiPoly::Variable(2, 0);
  SparseMultiPoly y = SparseMultiPoly::Variable(2, 1);
  SparseMultiPoly mean = ScaleBy(Add(x, y, limits), 0.5, limits);
  SparseMultiPoly diff = Add(x, ScaleBy(y, -1.0, limits), limits);
  return Add(mean, Compose(g, diff, limits), limits);
}

double PowerMeanMax(std::span<const double> xs, int d) {
  if (d < 1 || (d != 1 && d % 2 != 0)) {
    throw ValidationError("power-mean max needs d == 1 or an even d, got " +
                          std::to_string(d));
  }
  if (xs.empty()) throw ValidationError("max of an empty set");
  if (d == 1) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum;
  }
  double scale = 0.0;
  for (double x : xs) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += std::pow(x / scale, d);
  return scale * std::pow(sum, 1.0 / d);
}

std::vector<double> CalibrateIntervals(const ModelGraph& model,
                                       const Dataset& sample,
                                       const CalibrationOptions& options) {
  if (sample.size() == 0) throw ValidationError("calibration sample is empty");
  if (!(options.percentile > 0.0 && options.percentile <= 100.0)) {
    throw ValidationError("percentile must lie in (0, 100]");
  }
  std::vector<std::vector<double>> magnitudes(model.layers.size());
  for (const auto& x : sample.inputs) {
    const auto pre = LayerPreActivations(model, x);
    for (std::size_t l = 0; l < pre.size(); ++l) {
      for (double v : pre[l]) magnitudes[l].push_back(std::abs(v));
    }
  }
  std::vector<double> radii;
  for (auto& mags : magnitudes) {
    double quantile = 0.0;
    if (!mags.empty()) {
      // Nearest-rank percentile.
      const auto n = mags.size();
      auto rank = static_cast<std::size_t>(
          std::ceil(options.percentile / 100.0 * static_cast<double>(n)));
      rank = std::clamp<std::size_t>(rank, 1, n);
      std::nth_element(mags.begin(), mags.begin() + (rank - 1), mags.end());
      quantile = mags[rank - 1];
    }
    radii.push_back(std::max(options.floor, quantile * options.safety_factor));
  }
  return radii;
}

}  // namespace polydnn

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

#include "polydnn/polyalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

using Extended = long double;

void PruneInPlace(SparseMultiPoly::TermMap& terms, double eps) {
  std::erase_if(terms,
                [eps](const auto& kv) { return std::abs(kv.second) <= eps; });
}

void CheckVars(const SparseMultiPoly& a, const SparseMultiPoly& b) {
  if (a.num_vars() != b.num_vars()) {
    throw ValidationError("polynomial variable counts differ: " +
                          std::to_string(a.num_vars()) + " vs " +
                          std::to_string(b.num_vars()));
  }
}

void CheckTermCap(std::size_t count, const PolyLimits& limits) {
  if (count > limits.term_cap) {
    throw ExpansionTooLargeError("polynomial expansion exceeds term cap of " +
                                 std::to_string(limits.term_cap) + " terms");
  }
}

// Clenshaw in extended precision, used by the conversion self-check.
Extended ClenshawExtended(const std::vector<double>& c, Extended t) {
  Extended b1 = 0, b2 = 0;
  for (std::size_t k = c.size(); k-- > 1;) {
    Extended b0 = static_cast<Extended>(c[k]) + 2 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return static_cast<Extended>(c[0]) + t * b1 - b2;
}

}  // namespace

UniPoly::UniPoly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

bool UniPoly::IsIdentity() const {
  return coeffs_.size() == 2 && coeffs_[0] == 0.0 && coeffs_[1] == 1.0;
}

double UniPoly::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

ChebSeries::ChebSeries(std::vector<double> coeffs, Interval interval)
    : coeffs_(std::move(coeffs)), interval_(interval) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  if (!(interval_.lo < interval_.hi)) {
    throw ValidationError("Chebyshev interval must satisfy lo < hi");
  }
}

ChebSeries::Evaluation ChebSeries::Evaluate(double x) const {
  const double t =
      (2.0 * x - (interval_.lo + interval_.hi)) / (interval_.hi - interval_.lo);
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) {
    const double b0 = coeffs_[k] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return {coeffs_[0] + t * b1 - b2, !interval_.Contains(x)};
}

UniPoly ChebToMonomial(const ChebSeries& series, const PolyLimits& limits) {
  const auto& c = series.coeffs();
  const int degree = series.degree();
  if (degree > limits.degree_cap) {
    throw ValidationError("Chebyshev degree " + std::to_string(degree) +
                          " exceeds degree cap " +
                          std::to_string(limits.degree_cap));
  }
  const std::size_t n = c.size();

  // Monomial coefficients in t, accumulated from T_{k+1} = 2t T_k - T_{k-1}.
  std::vector<Extended> in_t(n, 0);
  std::vector<Extended> prev(n, 0), cur(n, 0);
  prev[0] = 1;
  in_t[0] += c[0];
  if (n > 1) {
    cur[1] = 1;
    in_t[1] += c[1];
  }
  for (std::size_t k = 2; k < n; ++k) {
    std::vector<Extended> next(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) next[i + 1] = 2 * cur[i];
    for (std::size_t i = 0; i < n; ++i) next[i] -= prev[i];
    for (std::size_t i = 0; i < n; ++i) in_t[i] += c[k] * next[i];
    prev = std::move(cur);
    cur = std::move(next);
  }

  // Substitute t = alpha x + beta by Horner over polynomials.
  const Extended lo = series.interval().lo, hi = series.interval().hi;
  const Extended alpha = 2 / (hi - lo);
  const Extended beta = -(hi + lo) / (hi - lo);
  std::vector<Extended> in_x{in_t[n - 1]};
  for (std::size_t k = n - 1; k-- > 0;) {
    std::vector<Extended> next(in_x.size() + 1, 0);
    for (std::size_t i = 0; i < in_x.size(); ++i) {
      next[i] += in_x[i] * beta;
      next[i + 1] += in_x[i] * alpha;
    }
    next[0] += in_t[k];
    in_x = std::move(next);
  }
  in_x.resize(n);

  std::vector<double> coeffs(n);
  std::transform(in_x.begin(), in_x.end(), coeffs.begin(),
                 [](Extended v) { return static_cast<double>(v); });
  UniPoly result(std::move(coeffs));

  // Check the rounded double coefficients against the series.
  constexpr int kCheckPoints = 1000;
  Extended max_dev = 0, max_mag = 1;
  for (int i = 0; i < kCheckPoints; ++i) {
    const Extended x = lo + (hi - lo) * i / (kCheckPoints - 1);
    const Extended t = alpha * x + beta;
    const Extended want = ClenshawExtended(c, t);
    Extended got = 0;
    const auto& rc = result.coeffs();
    for (auto it = rc.rbegin(); it != rc.rend(); ++it) got = got * x + *it;
    max_dev = std::max(max_dev, std::abs(got - want));
    max_mag = std::max(max_mag, std::abs(want));
  }
  if (max_dev > limits.conversion_tol * max_mag) {
    throw ConditioningError(
        "monomial conversion of degree " + std::to_string(degree) +
        " series deviates by " + std::to_string(static_cast<double>(max_dev)) +
        " from Clenshaw; use a lower degree");
  }
  return result;
}

SparseMultiPoly SparseMultiPoly::Constant(std::size_t num_vars, double value) {
  SparseMultiPoly p(num_vars);
  p.AddTerm(Exponents(num_vars, 0), value);
  return p;
}

SparseMultiPoly SparseMultiPoly::Variable(std::size_t num_vars,
                                          std::size_t index) {
  if (index >= num_vars) {
    throw ValidationError("variable index " + std::to_string(index) +
                          " out of range for " + std::to_string(num_vars) +
                          " variables");
  }
  SparseMultiPoly p(num_vars);
  Exponents e(num_vars, 0);
  e[index] = 1;
  p.AddTerm(e, 1.0);
  return p;
}

SparseMultiPoly SparseMultiPoly::FromTermMap(std::size_t num_vars,
                                             TermMap terms, double prune_eps) {
  for (const auto& [exps, c] : terms) {
    if (exps.size() != num_vars) {
      throw ValidationError("exponent vector length " +
                            std::to_string(exps.size()) + " != num_vars " +
                            std::to_string(num_vars));
    }
  }
  PruneInPlace(terms, prune_eps);
  SparseMultiPoly out(num_vars);
  out.terms_ = std::move(terms);
  return out;
}

std::uint32_t SparseMultiPoly::total_degree() const {
  std::uint32_t best = 0;
  for (const auto& [exps, c] : terms_) {
    best = std::max(best, std::accumulate(exps.begin(), exps.end(), 0u));
  }
  return best;
}

void SparseMultiPoly::AddTerm(const Exponents& exps, double coeff,
                              double prune_eps) {
  if (exps.size() != num_vars_) {
    throw ValidationError("exponent vector length " +
                          std::to_string(exps.size()) + " != num_vars " +
                          std::to_string(num_vars_));
  }
  auto [it, inserted] = terms_.try_emplace(exps, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) <= prune_eps) terms_.erase(it);
}

double SparseMultiPoly::Evaluate(std::span<const double> x) const {
  if (x.size() != num_vars_) {
    throw ValidationError("evaluation point has " + std::to_string(x.size()) +
                          " coordinates, polynomial has " +
                          std::to_string(num_vars_) + " variables");
  }
  std::vector<std::uint32_t> max_exp(num_vars_, 0);
  for (const auto& [exps, c] : terms_) {
    for (std::size_t v = 0; v < num_vars_; ++v) {
      max_exp[v] = std::max(max_exp[v], exps[v]);
    }
  }
  std::vector<std::vector<double>> powers(num_vars_);
  for (std::size_t v = 0; v < num_vars_; ++v) {
    powers[v].resize(max_exp[v] + 1);
    powers[v][0] = 1.0;
    for (std::uint32_t e = 1; e <= max_exp[v]; ++e) {
      powers[v][e] = powers[v][e - 1] * x[v];
    }
  }
  double sum = 0.0;
  for (const auto& [exps, c] : terms_) {
    double term = c;
    for (std::size_t v = 0; v < num_vars_; ++v) {
      if (exps[v] != 0) term *= powers[v][exps[v]];
    }
    sum += term;
  }
  return sum;
}

SparseMultiPoly Add(const SparseMultiPoly& a, const SparseMultiPoly& b,
                    const PolyLimits& limits) {
  CheckVars(a, b);
  SparseMultiPoly::TermMap terms = a.terms();
  for (const auto& [exps, c] : b.terms()) {
    auto [it, inserted] = terms.try_emplace(exps, c);
    if (!inserted) it->second += c;
  }
  CheckTermCap(terms.size(), limits);
  return SparseMultiPoly::FromTermMap(a.num_vars(), std::move(terms), limits.prune_eps);
}

SparseMultiPoly Multiply(const SparseMultiPoly& a, const SparseMultiPoly& b,
                         const PolyLimits& limits) {
  CheckVars(a, b);
  const std::size_t n = a.num_vars();
  SparseMultiPoly::TermMap terms;
  Exponents e(n);
  for (const auto& [ea, ca] : a.terms()) {
    for (const auto& [eb, cb] : b.terms()) {
      for (std::size_t v = 0; v < n; ++v) e[v] = ea[v] + eb[v];
      auto [it, inserted] = terms.try_emplace(e, ca * cb);
      if (!inserted) {
        it->second += ca * cb;
      } else {
        CheckTermCap(terms.size(), limits);
      }
    }
  }
  return SparseMultiPoly::FromTermMap(n, std::move(terms), limits.prune_eps);
}

SparseMultiPoly ScaleBy(const SparseMultiPoly& a, double c,
                      const PolyLimits& limits) {
  SparseMultiPoly::TermMap terms;
  if (c != 0.0) {
    for (const auto& [exps, v] : a.terms()) terms.emplace(exps, v * c);
  }
  return SparseMultiPoly::FromTermMap(a.num_vars(), std::move(terms), limits.prune_eps);
}

SparseMultiPoly Power(const SparseMultiPoly& a, unsigned n,
                      const PolyLimits& limits) {
  SparseMultiPoly result = SparseMultiPoly::Constant(a.num_vars(), 1.0);
  for (unsigned i = 0; i < n; ++i) result = Multiply(result, a, limits);
  return result;
}

SparseMultiPoly Compose(const UniPoly& p, const SparseMultiPoly& q,
                        const PolyLimits& limits) {
  const auto n = q.num_vars();
  if (p.IsIdentity()) return q;
  const auto degree_bound =
      static_cast<long>(p.degree()) * static_cast<long>(q.total_degree());
  if (degree_bound > limits.degree_cap) {
    throw ExpansionTooLargeError(
        "composition degree " + std::to_string(degree_bound) +
        " exceeds degree cap " + std::to_string(limits.degree_cap));
  }
  const auto& c = p.coeffs();
  SparseMultiPoly result = SparseMultiPoly::Constant(n, c[0]);
  SparseMultiPoly power = SparseMultiPoly::Constant(n, 1.0);
  for (std::size_t j = 1; j < c.size(); ++j) {
    power = Multiply(power, q, limits);
    if (c[j] != 0.0) result = Add(result, ScaleBy(power, c[j], limits), limits);
  }
  return result;
}

}  // namespace polydnn

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
#include <map>
#include <span>
#include <vector>

namespace polydnn {

// Tunable limits for conversion and symbolic expansion.
struct PolyLimits {
  int degree_cap = 40;
  std::size_t term_cap = 5'000'000;
  // Terms with |coeff| <= prune_eps are dropped. 0 drops exact zeros only.
  double prune_eps = 0.0;
  // Relative tolerance for Chebyshev to monomial conversion.
  double conversion_tol = 1e-6;
};

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  bool Contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

// Univariate polynomial in the monomial basis; coeffs()[j] multiplies x^j.
class UniPoly {
 public:
  UniPoly() : coeffs_{0.0} {}
  explicit UniPoly(std::vector<double> coeffs);

  static UniPoly Identity() { return UniPoly({0.0, 1.0}); }

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool IsZero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
  bool IsIdentity() const;

  // Horner evaluation.
  double operator()(double x) const;

  friend bool operator==(const UniPoly&, const UniPoly&) = default;

 private:
  std::vector<double> coeffs_;
};

// Chebyshev series sum_j c_j T_j(t) with t the affine image of x in [-1, 1].
class ChebSeries {
 public:
  ChebSeries(std::vector<double> coeffs, Interval interval);

  struct Evaluation {
    double value;
    bool extrapolated;
  };

  const std::vector<double>& coeffs() const { return coeffs_; }
  const Interval& interval() const { return interval_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  // Clenshaw recurrence. Points outside the interval are evaluated anyway and
  // flagged.
  Evaluation Evaluate(double x) const;
  double operator()(double x) const { return Evaluate(x).value; }

 private:
  std::vector<double> coeffs_;
  Interval interval_;
};

// Converts to the monomial basis in x (not t). Computed in extended
// precision and checked against Clenshaw on 1000 interval points; throws
// ConditioningError when the relative deviation exceeds limits.conversion_tol.
UniPoly ChebToMonomial(const ChebSeries& series, const PolyLimits& limits = {});

using Exponents = std::vector<std::uint32_t>;

// Sparse multivariate polynomial keyed by dense exponent vectors. The ordered
// map gives a canonical term order, which serialization and fingerprints rely
// on.
class SparseMultiPoly {
 public:
  using TermMap = std::map<Exponents, double>;

  explicit SparseMultiPoly(std::size_t num_vars = 0) : num_vars_(num_vars) {}

  static SparseMultiPoly Constant(std::size_t num_vars, double value);
  static SparseMultiPoly Variable(std::size_t num_vars, std::size_t index);
  // Takes ownership of a term map; drops terms with |coeff| <= prune_eps.
  static SparseMultiPoly FromTermMap(std::size_t num_vars, TermMap terms,
                                     double prune_eps = 0.0);

  std::size_t num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  bool IsZero() const { return terms_.empty(); }
  std::uint32_t total_degree() const;

  // Accumulates coeff into the term for exps, then prunes.
  void AddTerm(const Exponents& exps, double coeff, double prune_eps = 0.0);

  double Evaluate(std::span<const double> x) const;

  friend bool operator==(const SparseMultiPoly&,
                         const SparseMultiPoly&) = default;

 private:
  std::size_t num_vars_;
  TermMap terms_;
};

SparseMultiPoly Add(const SparseMultiPoly& a, const SparseMultiPoly& b,
                    const PolyLimits& limits = {});
SparseMultiPoly Multiply(const SparseMultiPoly& a, const SparseMultiPoly& b,
                         const PolyLimits& limits = {});
SparseMultiPoly ScaleBy(const SparseMultiPoly& a, double c,
                      const PolyLimits& limits = {});
SparseMultiPoly Power(const SparseMultiPoly& a, unsigned n,
                      const PolyLimits& limits = {});

// p(q(x)) = sum_j p_j q^j with each power of q formed once.
SparseMultiPoly Compose(const UniPoly& p, const SparseMultiPoly& q,
                        const PolyLimits& limits = {});

}  // namespace polydnn

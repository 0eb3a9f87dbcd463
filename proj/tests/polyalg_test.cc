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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "polydnn/approx.h"
#include "polydnn/errors.h"

namespace polydnn {
namespace {

using Terms = SparseMultiPoly::TermMap;

SparseMultiPoly Poly(std::size_t n, Terms t) {
  return SparseMultiPoly::FromTermMap(n, std::move(t));
}

SparseMultiPoly RandomPoly(std::mt19937_64& rng, std::size_t vars, int max_deg,
                           int terms) {
  std::uniform_int_distribution<int> e(0, max_deg);
  std::uniform_int_distribution<int> c(-5, 5);  // small integers keep sums exact
  SparseMultiPoly p(vars);
  for (int i = 0; i < terms; ++i) {
    Exponents exps(vars);
    int budget = max_deg;
    for (auto& x : exps) {
      x = static_cast<std::uint32_t>(std::min(e(rng), budget));
      budget -= static_cast<int>(x);
    }
    p.AddTerm(exps, c(rng));
  }
  return p;
}

TEST(UniPoly, IdentityEvaluates) { EXPECT_EQ(UniPoly({0.0, 1.0})(7.0), 7.0); }

TEST(UniPoly, TrimsTrailingZeros) {
  UniPoly p({1.0, 2.0, 0.0, 0.0});
  EXPECT_EQ(p.degree(), 1);
  EXPECT_TRUE(UniPoly({0.0, 0.0}).IsZero());
  EXPECT_EQ(UniPoly({0.0}).degree(), 0);
}

TEST(ChebSeries, FirstKindBasics) {
  ChebSeries t1({0.0, 1.0}, {-1.0, 1.0});
  EXPECT_DOUBLE_EQ(t1(0.5), 0.5);
  EXPECT_FALSE(t1.Evaluate(0.5).extrapolated);
  EXPECT_TRUE(t1.Evaluate(1.5).extrapolated);
  EXPECT_DOUBLE_EQ(t1(1.5), 1.5);
}

TEST(ChebSeries, RejectsDegenerateInterval) {
  EXPECT_THROW(ChebSeries({1.0}, {1.0, 1.0}), ValidationError);
}

TEST(ChebToMonomial, SmallSeries) {
  EXPECT_EQ(ChebToMonomial(ChebSeries({0.0, 1.0}, {-1.0, 1.0})).coeffs(),
            (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(ChebToMonomial(ChebSeries({0.0, 0.0, 1.0}, {-1.0, 1.0})).coeffs(),
            (std::vector<double>{-1.0, 0.0, 2.0}));
}

TEST(ChebToMonomial, AffineMap) {
  // T1 on [2, 6] is (x - 4) / 2.
  const auto p = ChebToMonomial(ChebSeries({0.0, 1.0}, {2.0, 6.0}));
  EXPECT_DOUBLE_EQ(p(5.0), 0.5);
  EXPECT_DOUBLE_EQ(p(2.0), -1.0);
}

TEST(ChebToMonomial, Relu30AgreesWithClenshaw) {
  const auto fit = FitChebyshev([](double x) { return std::max(x, 0.0); }, 30,
                                {-8.0, 8.0});
  const auto mono = ChebToMonomial(fit.series);
  double scale = 0.0;
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = -8.0 + 16.0 * i / 1000.0;
    scale = std::max(scale, std::abs(fit.series(x)));
    worst = std::max(worst, std::abs(mono(x) - fit.series(x)));
  }
  EXPECT_LE(worst, 1e-6 * std::max(1.0, scale));
  // ReLU(3) = 3, to within the dense-grid error of the fit.
  EXPECT_NEAR(fit.series(3.0), 3.0, fit.report.max_abs_error);
  EXPECT_NEAR(mono(3.0), 3.0, fit.report.max_abs_error + 1e-6 * scale);
}

TEST(ChebToMonomial, DegreeAboveCapRejected) {
  std::vector<double> c(42, 0.0);
  c.back() = 1.0;
  EXPECT_THROW(ChebToMonomial(ChebSeries(c, {-1.0, 1.0})), ValidationError);
}

TEST(ChebToMonomial, IllConditionedConversionRaises) {
  // Degree 40 with a tight tolerance cannot be represented in doubles.
  const auto fit = FitChebyshev([](double x) { return std::max(x, 0.0); }, 40,
                                {-8.0, 8.0});
  PolyLimits strict;
  strict.conversion_tol = 1e-12;
  EXPECT_THROW(ChebToMonomial(fit.series, strict), ConditioningError);
}

TEST(SparseMultiPoly, BinomialSquare) {
  const auto x1 = SparseMultiPoly::Variable(2, 0);
  const auto x2 = SparseMultiPoly::Variable(2, 1);
  const auto sq = Power(Add(x1, x2), 2);
  EXPECT_EQ(sq, Poly(2, {{{2, 0}, 1.0}, {{1, 1}, 2.0}, {{0, 2}, 1.0}}));
}

TEST(SparseMultiPoly, PowerZeroIsOne) {
  const auto p = Poly(2, {{{1, 3}, 2.5}});
  EXPECT_EQ(Power(p, 0), SparseMultiPoly::Constant(2, 1.0));
}

TEST(SparseMultiPoly, DifferenceOfSquaresPrunesZero) {
  const auto one = SparseMultiPoly::Constant(1, 1.0);
  const auto x = SparseMultiPoly::Variable(1, 0);
  const auto prod = Multiply(Add(one, x), Add(one, ScaleBy(x, -1.0)));
  EXPECT_EQ(prod, Poly(1, {{{0}, 1.0}, {{2}, -1.0}}));
  EXPECT_EQ(prod.term_count(), 2u);
}

TEST(SparseMultiPoly, Evaluate) {
  EXPECT_EQ(SparseMultiPoly(3).Evaluate(std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_EQ(Poly(2, {{{2, 1}, 1.0}}).Evaluate(std::vector<double>{2, 3}), 12.0);
}

TEST(SparseMultiPoly, TermCapRaises) {
  PolyLimits tiny;
  tiny.term_cap = 5;
  const auto q = Add(Add(SparseMultiPoly::Variable(3, 0), SparseMultiPoly::Variable(3, 1)),
                     SparseMultiPoly::Variable(3, 2));
  EXPECT_THROW(Power(q, 3, tiny), ExpansionTooLargeError);
}

TEST(SparseMultiPoly, MismatchedVariablesRejected) {
  EXPECT_THROW(Add(SparseMultiPoly(2), SparseMultiPoly(3)), ValidationError);
}

TEST(SparseMultiPoly, RingLaws) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = RandomPoly(rng, 3, 3, 5);
    const auto b = RandomPoly(rng, 3, 3, 5);
    const auto c = RandomPoly(rng, 3, 3, 5);
    EXPECT_EQ(Add(a, b), Add(b, a));
    EXPECT_EQ(Multiply(a, b), Multiply(b, a));
    EXPECT_EQ(Add(Add(a, b), c), Add(a, Add(b, c)));
    EXPECT_EQ(Multiply(Multiply(a, b), c), Multiply(a, Multiply(b, c)));
    EXPECT_EQ(Multiply(a, Add(b, c)), Add(Multiply(a, b), Multiply(a, c)));
  }
}

TEST(SparseMultiPoly, EvaluationIsMultiplicative) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = RandomPoly(rng, 3, 3, 6);
    const auto b = RandomPoly(rng, 3, 3, 6);
    const std::vector<double> x{coord(rng), coord(rng), coord(rng)};
    const double expect = a.Evaluate(x) * b.Evaluate(x);
    EXPECT_NEAR(Multiply(a, b).Evaluate(x), expect, 1e-9 * std::max(1.0, std::abs(expect)));
  }
}

TEST(Compose, SquareOfSum) {
  const auto q = Add(SparseMultiPoly::Variable(2, 0), SparseMultiPoly::Variable(2, 1));
  EXPECT_EQ(Compose(UniPoly({0.0, 0.0, 1.0}), q), Power(q, 2));
}

TEST(Compose, IdentityReturnsArgument) {
  const auto q = Poly(2, {{{1, 2}, 0.3}, {{0, 0}, -1.0}});
  EXPECT_EQ(Compose(UniPoly::Identity(), q), q);
}

TEST(Compose, MatchesNestedEvaluation) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  const auto q = Poly(2, {{{1, 0}, 0.5}, {{0, 1}, -1.0}, {{0, 0}, 1.0}});
  for (int trial = 0; trial < 100; ++trial) {
    const UniPoly p({c(rng), c(rng), c(rng), c(rng)});
    const std::vector<double> x{c(rng), c(rng)};
    const double expect = p(q.Evaluate(x));
    EXPECT_NEAR(Compose(p, q).Evaluate(x), expect, 1e-6 * std::max(1.0, std::abs(expect)));
  }
  const UniPoly p({1.0, -2.0, 0.5, 0.25});
  const std::vector<double> at{2.0, 3.0};
  EXPECT_NEAR(Compose(p, q).Evaluate(at), p(q.Evaluate(at)), 1e-12);
}

TEST(Compose, DegreeCapRaises) {
  PolyLimits limits;
  limits.degree_cap = 10;
  const auto q = Power(SparseMultiPoly::Variable(1, 0), 3);
  std::vector<double> c(5, 1.0);
  EXPECT_THROW(Compose(UniPoly(c), q, limits), ExpansionTooLargeError);
}

}  // namespace
}  // namespace polydnn

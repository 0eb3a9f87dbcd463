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

#include <cmath>
#include <random>
#include <set>
#include <type_traits>

#include "gtest/gtest.h"
#include "polydnn/errors.h"
#include "polydnn/field.h"
#include "polydnn/fixed_point.h"
#include "polydnn/sharing.h"
#include "test_util.h"

namespace polydnn {
namespace {

// Scale discipline is enforced by the type system.
template <typename A, typename B>
concept Addable = requires(const PrimeField& f, A a, B b) { f.Add(a, b); };
template <typename A, typename B>
concept Multipliable = requires(const PrimeField& f, A a, B b) { f.Mul(a, b); };
static_assert(Addable<Fx, Fx>);
static_assert(Addable<Fx2, Fx2>);
static_assert(!Addable<Fx, Fx2>);
static_assert(!Addable<Fx2, Fx>);
static_assert(Multipliable<Fx, Fx>);
static_assert(std::is_same_v<decltype(std::declval<PrimeField>().Mul(Fx{}, Fx{})), Fx2>);
static_assert(!Multipliable<Fx2, Fx>);
static_assert(!Multipliable<Fx2, Fx2>);
static_assert(!std::is_convertible_v<Fx, Fx2>);

// 0.99 quantiles of chi-square with 63 and 49 degrees of freedom (scipy).
constexpr double kChi2Crit63 = 92.01002361413214;
constexpr double kChi2Crit49 = 74.91947430847816;

std::size_t Bucket(u128 v, u128 p, std::size_t buckets) {
  return static_cast<std::size_t>(v / (p / buckets + 1));
}

TEST(PrimeField, SupportedSizes) {
  for (int bits : {61, 89, 107, 127}) {
    EXPECT_TRUE(IsSupportedFieldBits(bits));
    EXPECT_EQ(PrimeField(bits).modulus(), (u128{1} << bits) - 1);
  }
  EXPECT_FALSE(IsSupportedFieldBits(64));
  EXPECT_THROW(PrimeField(64), ValidationError);
}

TEST(PrimeField, ArithmeticMatchesSlowReference) {
  std::mt19937_64 rng(1);
  for (int bits : {61, 89, 107, 127}) {
    const PrimeField f(bits);
    const u128 p = f.modulus();
    for (int i = 0; i < 2000; ++i) {
      const u128 a = ((u128{rng()} << 64) | rng()) % p;
      const u128 b = ((u128{rng()} << 64) | rng()) % p;
      EXPECT_TRUE(f.Mul(a, b) == testing::SlowMulMod(a, b, p));
      EXPECT_TRUE(f.Add(a, b) == (a + b) % p);
      EXPECT_TRUE(f.Sub(a, b) == (a + p - b) % p);
      EXPECT_TRUE(f.Add(a, f.Neg(a)) == 0);
    }
    EXPECT_TRUE(f.Mul(p - 1, p - 1) == 1);
    EXPECT_TRUE(f.Reduce(p) == 0);
  }
}

TEST(Decimal, RoundTrip) {
  const u128 big = (u128{1} << 127) - 2;
  EXPECT_EQ(ToDecimal(big), "170141183460469231731687303715884105726");
  EXPECT_TRUE(ParseDecimal(ToDecimal(big)) == big);
  EXPECT_EQ(ToDecimal(0), "0");
  EXPECT_THROW(ParseDecimal("12a"), ParseError);
  EXPECT_THROW(ParseDecimal(""), ParseError);
  EXPECT_THROW(ParseDecimal("340282366920938463463374607431768211456"), ParseError);
}

TEST(FixedPoint, Examples) {
  const FixedPointParams params(127, 16);
  EXPECT_TRUE(EncodeFixed(1.5, params).raw == 98304);
  EXPECT_TRUE(EncodeFixed(-0.25, params).raw == params.field().modulus() - 16384);
  EXPECT_EQ(DecodeFixed(EncodeFixed(-0.25, params), params), -0.25);
}

TEST(FixedPoint, DefaultBound) {
  const FixedPointParams params;
  EXPECT_EQ(params.field_bits(), 127);
  EXPECT_EQ(params.frac_bits(), 24);
  EXPECT_EQ(params.max_magnitude(), std::ldexp(1.0, 77));
  // 2 * M * 2^(2f) < p.
  EXPECT_LT(2 * params.max_magnitude() * std::ldexp(1.0, 48), std::ldexp(1.0, 127));
  EXPECT_THROW(EncodeFixed(std::ldexp(1.0, 78), params), FieldOverflowError);
  EXPECT_THROW(EncodeFixed(NAN, params), FieldOverflowError);
  EXPECT_THROW(FixedPointParams(61, 30), ValidationError);
}

TEST(FixedPoint, RoundTripWithinResolution) {
  for (auto [bits, f] : {std::pair{127, 24}, std::pair{61, 20}, std::pair{89, 16}}) {
    const FixedPointParams params(bits, f);
    const double m = params.max_magnitude();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-m, m);
    std::uniform_real_distribution<double> small(-4.0, 4.0);
    for (int i = 0; i < 10000; ++i) {
      const double v = i % 2 ? d(rng) : small(rng);
      EXPECT_LE(std::abs(DecodeFixed(EncodeFixed(v, params), params) - v), std::ldexp(1.0, -f));
    }
  }
}

TEST(FixedPoint, DoubleScaleDecode) {
  const FixedPointParams params;
  const auto& f = params.field();
  const Fx2 prod = f.Mul(EncodeFixed(-1.5, params), EncodeFixed(2.25, params));
  EXPECT_EQ(DecodeFixed(prod, params), -3.375);
}

TEST(Sharing, ZeroSecretTwoParties) {
  const PrimeField f;
  ShareRng rng(1);
  const auto s = ShareSecret(Fx{0}, 2, f, rng);
  EXPECT_TRUE(f.Add(s[0].value.raw, s[1].value.raw) == 0);
}

TEST(Sharing, ReconstructRandom) {
  const PrimeField f;
  ShareRng rng(2);
  for (std::size_t k : {2u, 3u, 5u, 10u}) {
    for (int i = 0; i < 200; ++i) {
      const Fx secret{rng.UniformBelow(f.modulus())};
      const auto shares = ShareSecret(secret, k, f, rng);
      ASSERT_EQ(shares.size(), k);
      std::set<std::uint32_t> ids;
      for (const auto& s : shares) {
        ids.insert(s.party_id);
        EXPECT_TRUE(f.Contains(s.value.raw));
      }
      EXPECT_EQ(ids.size(), k);
      EXPECT_EQ(Reconstruct<Scale::kSingle>(shares, f), secret);
    }
  }
}

TEST(Sharing, Errors) {
  const PrimeField f;
  ShareRng rng(3);
  EXPECT_THROW(ShareSecret(Fx{5}, 1, f, rng), ValidationError);
  auto shares = ShareSecret(Fx{5}, 3, f, rng);
  shares[2].party_id = shares[0].party_id;
  EXPECT_THROW(Reconstruct<Scale::kSingle>(shares, f), ValidationError);
}

TEST(ShareRng, SeededIsReproducible) {
  ShareRng a(42);
  ShareRng b(42);
  ShareRng c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.Next64();
    EXPECT_EQ(x, b.Next64());
    differs |= x != c.Next64();
  }
  EXPECT_TRUE(differs);
  ShareRng os1;
  ShareRng os2;
  EXPECT_NE(os1.Next64(), os2.Next64());
}

TEST(ShareRng, UniformBelowInRange) {
  ShareRng rng(4);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.UniformBelow(7), 7u);
}

TEST(Sharing, SingleShareUniform) {
  const PrimeField f;
  ShareRng rng(5);
  constexpr std::size_t kBuckets = 64;
  constexpr int kN = 100'000;
  std::vector<double> counts(kBuckets, 0.0);
  for (int i = 0; i < kN; ++i) {
    const auto s = ShareSecret(Fx{12345}, 3, f, rng);
    counts[Bucket(s[2].value.raw, f.modulus(), kBuckets)] += 1;
  }
  const double expected = static_cast<double>(kN) / kBuckets;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, kChi2Crit63);
}

TEST(Sharing, PairOfSharesIndependent) {
  const PrimeField f;
  ShareRng rng(6);
  constexpr std::size_t kB = 8;
  constexpr int kN = 100'000;
  std::vector<std::vector<double>> table(kB, std::vector<double>(kB, 0.0));
  for (int i = 0; i < kN; ++i) {
    const auto s = ShareSecret(Fx{777}, 3, f, rng);
    table[Bucket(s[0].value.raw, f.modulus(), kB)][Bucket(s[2].value.raw, f.modulus(), kB)] += 1;
  }
  std::vector<double> rows(kB, 0.0);
  std::vector<double> cols(kB, 0.0);
  for (std::size_t i = 0; i < kB; ++i) {
    for (std::size_t j = 0; j < kB; ++j) {
      rows[i] += table[i][j];
      cols[j] += table[i][j];
    }
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < kB; ++i) {
    for (std::size_t j = 0; j < kB; ++j) {
      const double e = rows[i] * cols[j] / kN;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  EXPECT_LT(chi2, kChi2Crit49);
}

}  // namespace
}  // namespace polydnn

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

#include "polydnn/mpc.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "polydnn/errors.h"
#include "test_util.h"

namespace polydnn {
namespace {

using Terms = SparseMultiPoly::TermMap;

ExpandedNetworkPoly Linear4() {
  ExpandedNetworkPoly p;
  p.input_width = 2;
  p.outputs = {SparseMultiPoly::FromTermMap(2, Terms{{{1, 0}, 4.0}, {{0, 1}, 4.0}})};
  p.total_degree = 1;
  p.term_count = 2;
  return p;
}

ExpandedNetworkPoly RandomUnivariate(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  Terms t;
  for (int j = 0; j <= degree; ++j) t[{static_cast<std::uint32_t>(j)}] = c(rng);
  ExpandedNetworkPoly p;
  p.input_width = 1;
  p.outputs = {SparseMultiPoly::FromTermMap(1, std::move(t))};
  p.total_degree = static_cast<std::uint32_t>(degree);
  p.term_count = p.outputs[0].term_count();
  return p;
}

std::vector<PartyOutput> RunPublic(const std::vector<PartyProgram>& programs,
                                   const std::vector<double>& x, Transcript* t) {
  std::vector<PartyOutput> outs;
  for (const auto& p : programs) outs.push_back(EvaluatePublicInput(p, x, t));
  return outs;
}

std::vector<u128> Raw(const std::vector<Fx2>& v) {
  std::vector<u128> out;
  for (const auto& e : v) out.push_back(e.raw);
  return out;
}

TEST(DealProgram, LinearExample) {
  const FixedPointParams params;
  ShareRng rng(1);
  Transcript t;
  const auto programs = DealProgram(Linear4(), 3, params, rng, &t);
  ASSERT_EQ(programs.size(), 3u);
  const auto& f = params.field();
  for (std::size_t term = 0; term < 2; ++term) {
    Fx sum{};
    for (const auto& p : programs) {
      EXPECT_EQ(p.structure, programs[0].structure);
      EXPECT_EQ(p.fingerprint, programs[0].fingerprint);
      ASSERT_EQ(p.coefficient_shares[0].size(), 2u);
      sum = f.Add(sum, p.coefficient_shares[0][term]);
    }
    EXPECT_EQ(sum, EncodeFixed(4.0, params));
  }
  EXPECT_EQ(t.counts().dealer_to_party, 3u);
  EXPECT_EQ(t.counts().party_to_party, 0u);
}

TEST(DealProgram, Errors) {
  const FixedPointParams params;
  ShareRng rng(2);
  EXPECT_THROW(DealProgram(Linear4(), 1, params, rng), ValidationError);
  auto big = Linear4();
  big.outputs[0] = SparseMultiPoly::FromTermMap(2, Terms{{{1, 0}, 1e30}});
  EXPECT_THROW(DealProgram(big, 2, params, rng), FieldOverflowError);
}

TEST(PublicInput, LinearExample) {
  const FixedPointParams params;
  for (std::size_t k : {2u, 10u}) {
    ShareRng rng(k);
    Transcript t;
    const auto programs = DealProgram(Linear4(), k, params, rng, &t);
    const auto outs = RunPublic(programs, {1.0, 2.0}, &t);
    const auto r = ReconstructOutput(outs, params);
    EXPECT_EQ(r.logits, (std::vector<double>{12.0}));
    EXPECT_EQ(t.counts().party_to_party, 0u);
    EXPECT_EQ(t.counts().dealer_to_party, k);
    EXPECT_EQ(t.counts().party_to_client, k);
  }
}

TEST(PublicInput, ZeroPolynomial) {
  const FixedPointParams params;
  ShareRng rng(3);
  ExpandedNetworkPoly zero;
  zero.input_width = 2;
  zero.outputs = {SparseMultiPoly(2)};
  const auto programs = DealProgram(zero, 3, params, rng);
  const auto r = ReconstructOutput(RunPublic(programs, {0.7, 0.1}, nullptr), params);
  EXPECT_EQ(r.logits, (std::vector<double>{0.0}));
}

TEST(PublicInput, WidthMismatch) {
  const FixedPointParams params;
  ShareRng rng(4);
  const auto programs = DealProgram(Linear4(), 2, params, rng);
  EXPECT_THROW(EvaluatePublicInput(programs[0], std::vector<double>{1.0}), ValidationError);
}

TEST(PublicInput, ToyNetCoefficientsAndOutputsExact) {
  const FixedPointParams params;
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testing::RandomToyNet(gen);
    const auto a = testing::CompileToy(m, 1 + trial % 4, trial + 1);
    ShareRng rng(100 + trial);
    const std::size_t k = 5;
    const auto programs = DealProgram(*a.expanded, k, params, rng);
    const auto& f = params.field();
    std::size_t o = 0;
    for (const auto& poly : a.expanded->outputs) {
      std::size_t t = 0;
      for (const auto& [exps, c] : poly.terms()) {
        Fx sum{};
        for (const auto& p : programs) sum = f.Add(sum, p.coefficient_shares[o][t]);
        EXPECT_TRUE(sum.raw == testing::SlowEncode(c, params.frac_bits(), f.modulus()));
        ++t;
      }
      ++o;
    }
    for (int i = 0; i < 10; ++i) {
      const auto x = testing::UniformInput(gen, m.input_width);
      const auto r = ReconstructOutput(RunPublic(programs, x, nullptr), params);
      EXPECT_EQ(Raw(r.field_values),
                testing::OracleFixedPoint(*a.expanded, x, params.field_bits(), params.frac_bits()));
    }
  }
}

TEST(PublicInput, ClassMatchesClearPolynomial) {
  const FixedPointParams params;
  std::mt19937_64 gen(6);
  auto m = testing::RandomToyNet(gen, false);
  while (m.output_width() < 2) m = testing::RandomToyNet(gen, false);
  const auto a = testing::CompileToy(m, 3, 1);
  ShareRng rng(7);
  const auto programs = DealProgram(*a.expanded, 3, params, rng);
  for (int i = 0; i < 200; ++i) {
    const auto x = testing::UniformInput(gen, m.input_width);
    const auto clear = EvalExpanded(*a.expanded, x);
    const auto r = ReconstructOutput(RunPublic(programs, x, nullptr), params);
    EXPECT_EQ(r.predicted_class, Argmax(clear));
  }
}

TEST(PublicInput, FidelityBound) {
  // Each term contributes at most (|a| + |m|) * 2^-(f+1) + 2^-(2f+2) of
  // rounding; the decode itself is exact at scale 2^(2f).
  const FixedPointParams params;
  const double h = std::ldexp(1.0, -params.frac_bits() - 1);
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testing::RandomToyNet(gen);
    const auto a = testing::CompileToy(m, 1 + trial % 4, trial + 1);
    ShareRng rng(trial);
    const auto programs = DealProgram(*a.expanded, 2, params, rng);
    for (int i = 0; i < 20; ++i) {
      const auto x = testing::UniformInput(gen, m.input_width);
      const auto clear = EvalExpanded(*a.expanded, x);
      const auto r = ReconstructOutput(RunPublic(programs, x, nullptr), params);
      for (std::size_t o = 0; o < clear.size(); ++o) {
        double bound = 0.0;
        double magnitude = 0.0;
        for (const auto& [exps, c] : a.expanded->outputs[o].terms()) {
          double mono = 1.0;
          for (std::size_t v = 0; v < exps.size(); ++v) mono *= std::pow(x[v], exps[v]);
          bound += (std::abs(c) + std::abs(mono)) * h + h * h;
          magnitude += std::abs(c * mono);
        }
        bound += 1e-14 * magnitude;  // double evaluation of the clear side
        EXPECT_LE(std::abs(r.logits[o] - clear[o]), bound);
      }
    }
  }
}

TEST(Reconstruct, TamperedShareShiftsByOneUnit) {
  const FixedPointParams params;
  ShareRng rng(9);
  const auto programs = DealProgram(Linear4(), 2, params, rng);
  auto outs = RunPublic(programs, {1.0, 2.0}, nullptr);
  outs[1].values[0].raw = params.field().Add(outs[1].values[0].raw, 1);
  const auto r = ReconstructOutput(outs, params);
  EXPECT_EQ(r.logits[0] - 12.0, std::ldexp(1.0, -2 * params.frac_bits()));
}

TEST(Reconstruct, FingerprintMismatch) {
  const FixedPointParams params;
  ShareRng rng(10);
  auto a = RunPublic(DealProgram(Linear4(), 2, params, rng), {1.0, 2.0}, nullptr);
  auto other = Linear4();
  other.outputs[0] = SparseMultiPoly::FromTermMap(2, Terms{{{2, 0}, 4.0}, {{0, 1}, 4.0}});
  const auto b = RunPublic(DealProgram(other, 2, params, rng), {1.0, 2.0}, nullptr);
  a[1] = b[1];
  EXPECT_THROW(ReconstructOutput(a, params), FingerprintMismatchError);
}

TEST(Reconstruct, MissingOrDuplicateParty) {
  const FixedPointParams params;
  ShareRng rng(11);
  auto outs = RunPublic(DealProgram(Linear4(), 3, params, rng), {1.0, 2.0}, nullptr);
  EXPECT_THROW(ReconstructOutput(std::span(outs).first(2), params), ValidationError);
  outs[2] = outs[1];
  EXPECT_THROW(ReconstructOutput(outs, params), ValidationError);
}

TEST(Fingerprint, HexRoundTripAndSensitivity) {
  const FixedPointParams params;
  const auto s = StructureOf(Linear4());
  const auto fp = ComputeFingerprint(s, params, 3);
  EXPECT_EQ(ParseFingerprintHex(FingerprintHex(fp)), fp);
  EXPECT_NE(ComputeFingerprint(s, params, 4), fp);
  EXPECT_NE(ComputeFingerprint(s, FixedPointParams(127, 20), 3), fp);
  EXPECT_THROW(ParseFingerprintHex("abc"), ParseError);
}

TEST(InputPowers, SmallExamples) {
  const FixedPointParams params;
  const auto& f = params.field();
  ShareRng rng(12);
  auto reconstruct = [&](const std::vector<InputPowerShares>& b, std::size_t j) {
    Fx sum{};
    for (const auto& s : b) sum = f.Add(sum, s.powers[0][j]);
    return DecodeFixed(sum, params);
  };
  Transcript t;
  const auto b = ShareInputPowers(std::vector<double>{2.0}, 3, 3, params, rng, &t);
  EXPECT_EQ(reconstruct(b, 0), 2.0);
  EXPECT_EQ(reconstruct(b, 1), 4.0);
  EXPECT_EQ(reconstruct(b, 2), 8.0);
  EXPECT_EQ(t.counts().client_to_party, 3u);
  const auto z = ShareInputPowers(std::vector<double>{0.0}, 4, 2, params, rng);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(reconstruct(z, j), 0.0);
  const auto p = ShareInputPowers(std::vector<double>{1.5}, 10, 3, params, rng);
  EXPECT_EQ(reconstruct(p, 9), 57.6650390625);
}

TEST(InputPowers, Overflow) {
  const FixedPointParams params(61, 24);
  ShareRng rng(13);
  EXPECT_THROW(ShareInputPowers(std::vector<double>{3.0}, 10, 2, params, rng),
               FieldOverflowError);
}

struct SecretRun {
  ReconstructedOutput result;
  Transcript::Counts counts;
};

SecretRun RunSecret(const ExpandedNetworkPoly& poly, double x, std::size_t k,
                    std::uint64_t seed, const FixedPointParams& params) {
  Transcript t;
  ShareRng owner(seed);
  TrustedDealerScheme dealer(params, k, ShareRng(seed + 1), &t);
  const auto setup = dealer.Setup(StructureOf(poly));
  const auto programs = DealProgram(poly, k, params, owner, &t, &setup);
  const auto q = dealer.NextQuery();
  ShareRng client(seed + 2);
  auto inputs = ShareInputPowers(std::vector<double>{x}, std::max(1, static_cast<int>(poly.total_degree)),
                                 k, params, client, &t);
  MaskInputPowers(inputs, q.client, params);
  std::vector<PartyOutput> outs;
  for (std::size_t i = 0; i < k; ++i) {
    outs.push_back(EvaluateSecretInput(programs[i], inputs[i], q.parties[i], &t));
  }
  return {ReconstructOutput(outs, params), t.counts()};
}

TEST(SecretInput, DegreeOneTwoParties) {
  const FixedPointParams params;
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 50; ++trial) {
    const auto poly = RandomUnivariate(gen, 1);
    const double x = testing::UniformInput(gen, 1, -2.0, 2.0)[0];
    const auto run = RunSecret(poly, x, 2, trial, params);
    EXPECT_EQ(Raw(run.result.field_values),
              testing::OracleFixedPoint(poly, {x}, params.field_bits(), params.frac_bits()));
  }
}

TEST(SecretInput, ZeroCoefficients) {
  const FixedPointParams params;
  ExpandedNetworkPoly poly;
  poly.input_width = 1;
  poly.outputs = {SparseMultiPoly(1)};
  const auto run = RunSecret(poly, 0.8, 3, 1, params);
  EXPECT_EQ(run.result.logits, (std::vector<double>{0.0}));
}

TEST(SecretInput, DegreeTenThreeParties) {
  const FixedPointParams params;
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto poly = RandomUnivariate(gen, 10);
    const double x = testing::UniformInput(gen, 1, -1.5, 1.5)[0];
    const auto run = RunSecret(poly, x, 3, 1000 + trial, params);
    EXPECT_EQ(Raw(run.result.field_values),
              testing::OracleFixedPoint(poly, {x}, params.field_bits(), params.frac_bits()));
    EXPECT_EQ(run.counts.party_to_party, 0u);
    // Program dealing, mask setup and one query of correlated randomness.
    EXPECT_EQ(run.counts.dealer_to_party, 9u);
    EXPECT_EQ(run.counts.dealer_to_client, 1u);
    EXPECT_EQ(run.counts.client_to_party, 3u);
  }
}

TEST(SecretInput, MultipleOutputsAndQueries) {
  const FixedPointParams params;
  std::mt19937_64 gen(16);
  auto poly = RandomUnivariate(gen, 4);
  poly.outputs.push_back(RandomUnivariate(gen, 3).outputs[0]);
  ShareRng owner(1);
  TrustedDealerScheme dealer(params, 2, ShareRng(2));
  const auto setup = dealer.Setup(StructureOf(poly));
  const auto programs = DealProgram(poly, 2, params, owner, nullptr, &setup);
  ShareRng client(3);
  for (int query = 0; query < 5; ++query) {
    const double x = testing::UniformInput(gen, 1, -1.0, 1.0)[0];
    const auto q = dealer.NextQuery();
    EXPECT_EQ(q.client.query_id, static_cast<std::uint64_t>(query));
    auto inputs = ShareInputPowers(std::vector<double>{x}, 4, 2, params, client);
    MaskInputPowers(inputs, q.client, params);
    std::vector<PartyOutput> outs;
    for (std::size_t i = 0; i < 2; ++i) {
      outs.push_back(EvaluateSecretInput(programs[i], inputs[i], q.parties[i]));
    }
    EXPECT_EQ(Raw(ReconstructOutput(outs, params).field_values),
              testing::OracleFixedPoint(poly, {x}, params.field_bits(), params.frac_bits()));
  }
}

TEST(SecretInput, Errors) {
  const FixedPointParams params;
  std::mt19937_64 gen(17);
  const auto poly = RandomUnivariate(gen, 3);
  ShareRng owner(1);
  TrustedDealerScheme dealer(params, 2, ShareRng(2));
  EXPECT_THROW(dealer.NextQuery(), ValidationError);
  EXPECT_THROW(dealer.Setup(StructureOf(Linear4())), UnsupportedError);
  const auto setup = dealer.Setup(StructureOf(poly));
  const auto programs = DealProgram(poly, 2, params, owner, nullptr, &setup);
  const auto plain = DealProgram(poly, 2, params, owner);
  const auto q0 = dealer.NextQuery();
  const auto q1 = dealer.NextQuery();
  ShareRng client(3);
  auto inputs = ShareInputPowers(std::vector<double>{0.5}, 3, 2, params, client);
  // Powers never masked.
  EXPECT_THROW(EvaluateSecretInput(programs[0], inputs[0], q0.parties[0]), ValidationError);
  MaskInputPowers(inputs, q0.client, params);
  // Randomness from another query.
  EXPECT_THROW(EvaluateSecretInput(programs[0], inputs[0], q1.parties[0]), ValidationError);
  // Program dealt without product material.
  EXPECT_THROW(EvaluateSecretInput(plain[0], inputs[0], q0.parties[0]), ValidationError);
  // Another party's randomness.
  EXPECT_THROW(EvaluateSecretInput(programs[0], inputs[0], q0.parties[1]), ValidationError);
  auto short_inputs = ShareInputPowers(std::vector<double>{0.5}, 2, 2, params, client);
  EXPECT_THROW(MaskInputPowers(short_inputs, q1.client, params), ValidationError);
}

}  // namespace
}  // namespace polydnn

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

#include <sodium.h>

#include <algorithm>
#include <set>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

void AppendU64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

}  // namespace

void Transcript::Record(Channel channel, std::uint64_t messages) {
  counters_[static_cast<std::size_t>(channel)].fetch_add(messages);
}

Transcript::Counts Transcript::counts() const {
  auto at = [this](Channel c) {
    return counters_[static_cast<std::size_t>(c)].load();
  };
  return {at(Channel::kPartyToParty), at(Channel::kDealerToParty),
          at(Channel::kDealerToClient), at(Channel::kClientToParty),
          at(Channel::kPartyToClient)};
}

std::string FingerprintHex(const Fingerprint& fp) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (auto b : fp) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

Fingerprint ParseFingerprintHex(std::string_view hex) {
  if (hex.size() != 64) throw ParseError("fingerprint must be 64 hex digits");
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError("bad hex digit in fingerprint");
  };
  Fingerprint fp{};
  for (std::size_t i = 0; i < fp.size(); ++i) {
    fp[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) * 16 + nibble(hex[2 * i + 1]));
  }
  return fp;
}

std::size_t PublicStructure::term_count() const {
  std::size_t n = 0;
  for (const auto& m : monomials) n += m.size();
  return n;
}

std::uint32_t PublicStructure::max_exponent() const {
  std::uint32_t best = 0;
  for (const auto& out : monomials) {
    for (const auto& exps : out) {
      for (auto e : exps) best = std::max(best, e);
    }
  }
  return best;
}

PublicStructure StructureOf(const ExpandedNetworkPoly& poly) {
  PublicStructure s;
  s.input_width = poly.input_width;
  for (const auto& p : poly.outputs) {
    auto& list = s.monomials.emplace_back();
    for (const auto& [exps, c] : p.terms()) list.push_back(exps);
  }
  return s;
}

Fingerprint ComputeFingerprint(const PublicStructure& structure,
                               const FixedPointParams& params,
                               std::uint32_t num_parties) {
  std::vector<unsigned char> bytes;
  static constexpr std::string_view kTag = "polydnn-structure-v1";
  bytes.insert(bytes.end(), kTag.begin(), kTag.end());
  AppendU64(bytes, structure.input_width);
  AppendU64(bytes, static_cast<std::uint64_t>(params.field_bits()));
  AppendU64(bytes, static_cast<std::uint64_t>(params.frac_bits()));
  AppendU64(bytes, num_parties);
  AppendU64(bytes, structure.monomials.size());
  for (const auto& out : structure.monomials) {
    AppendU64(bytes, out.size());
    for (const auto& exps : out) {
      for (auto e : exps) AppendU64(bytes, e);
    }
  }
  Fingerprint fp{};
  crypto_hash_sha256(fp.data(), bytes.data(), bytes.size());
  return fp;
}

std::vector<PartyProgram> DealProgram(const ExpandedNetworkPoly& poly,
                                      std::size_t k,
                                      const FixedPointParams& params,
                                      ShareRng& rng, Transcript* transcript,
                                      const ProductSetup* setup) {
  if (k < 2) throw ValidationError("need at least 2 parties");
  const PublicStructure structure = StructureOf(poly);
  const auto fingerprint =
      ComputeFingerprint(structure, params, static_cast<std::uint32_t>(k));
  const auto& field = params.field();

  std::vector<PartyProgram> parties(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& pp = parties[i];
    pp.party_id = static_cast<std::uint32_t>(i);
    pp.num_parties = static_cast<std::uint32_t>(k);
    pp.params = params;
    pp.structure = structure;
    pp.fingerprint = fingerprint;
    pp.coefficient_shares.resize(poly.outputs.size());
    if (setup != nullptr) pp.products.emplace();
  }
  if (setup != nullptr && (setup->masks.size() != poly.outputs.size() ||
                           setup->mask_shares.size() != k)) {
    throw ValidationError("product setup does not match the program");
  }

  for (std::size_t o = 0; o < poly.outputs.size(); ++o) {
    std::vector<Fx> masked;
    std::size_t t = 0;
    for (const auto& [exps, coeff] : poly.outputs[o].terms()) {
      Fx encoded;
      try {
        encoded = EncodeFixed(coeff, params);
      } catch (const FieldOverflowError& e) {
        throw FieldOverflowError(std::string("coefficient overflow: ") + e.what());
      }
      const auto shares = SplitAdditive(encoded.raw, k, field, rng);
      for (std::size_t i = 0; i < k; ++i) {
        parties[i].coefficient_shares[o].push_back({shares[i]});
      }
      if (setup != nullptr) masked.push_back(field.Sub(encoded, setup->masks[o].at(t)));
      ++t;
    }
    if (setup != nullptr) {
      for (std::size_t i = 0; i < k; ++i) {
        parties[i].products->masked_coefficients.push_back(masked);
        parties[i].products->mask_shares.push_back(setup->mask_shares[i].at(o));
      }
    }
  }
  if (transcript != nullptr) transcript->Record(Channel::kDealerToParty, k);
  return parties;
}

std::vector<std::vector<Fx>> EncodeMonomials(const PublicStructure& structure,
                                             std::span<const double> x,
                                             const FixedPointParams& params) {
  if (x.size() != structure.input_width) {
    throw ValidationError("input has width " + std::to_string(x.size()) +
                          ", program expects " +
                          std::to_string(structure.input_width));
  }
  const std::uint32_t max_exp = structure.max_exponent();
  std::vector<std::vector<double>> powers(x.size(),
                                          std::vector<double>(max_exp + 1, 1.0));
  for (std::size_t v = 0; v < x.size(); ++v) {
    for (std::uint32_t e = 1; e <= max_exp; ++e) {
      powers[v][e] = powers[v][e - 1] * x[v];
    }
  }
  std::vector<std::vector<Fx>> out;
  for (const auto& list : structure.monomials) {
    auto& row = out.emplace_back();
    row.reserve(list.size());
    for (const auto& exps : list) {
      double value = 1.0;
      for (std::size_t v = 0; v < exps.size(); ++v) {
        if (exps[v] != 0) value *= powers[v][exps[v]];
      }
      row.push_back(EncodeFixed(value, params));
    }
  }
  return out;
}

PartyOutput EvaluatePublicInput(const PartyProgram& program,
                                std::span<const double> x,
                                Transcript* transcript) {
  if (transcript != nullptr) transcript->Record(Channel::kClientToParty);
  const auto monomials = EncodeMonomials(program.structure, x, program.params);
  const auto& field = program.params.field();
  PartyOutput out;
  out.party_id = program.party_id;
  out.num_parties = program.num_parties;
  out.fingerprint = program.fingerprint;
  for (std::size_t o = 0; o < monomials.size(); ++o) {
    Fx2 acc{};
    const auto& shares = program.coefficient_shares.at(o);
    if (shares.size() != monomials[o].size()) {
      throw ValidationError("share count does not match monomial count");
    }
    for (std::size_t t = 0; t < shares.size(); ++t) {
      acc = field.Add(acc, field.Mul(shares[t], monomials[o][t]));
    }
    out.values.push_back(acc);
  }
  if (transcript != nullptr) transcript->Record(Channel::kPartyToClient);
  return out;
}

ReconstructedOutput ReconstructOutput(std::span<const PartyOutput> outputs,
                                      const FixedPointParams& params) {
  if (outputs.empty()) throw ValidationError("no party outputs to reconstruct");
  const auto& first = outputs.front();
  std::set<std::uint32_t> seen;
  for (const auto& out : outputs) {
    if (out.fingerprint != first.fingerprint) {
      throw FingerprintMismatchError(
          "party " + std::to_string(out.party_id) +
          " ran a different program (fingerprint " +
          FingerprintHex(out.fingerprint) + " vs " +
          FingerprintHex(first.fingerprint) + ")");
    }
    if (out.num_parties != first.num_parties ||
        out.values.size() != first.values.size()) {
      throw ValidationError("party outputs disagree on shape");
    }
    if (!seen.insert(out.party_id).second) {
      throw ValidationError("duplicate output from party " +
                            std::to_string(out.party_id));
    }
  }
  if (outputs.size() != first.num_parties) {
    throw ValidationError("have outputs from " + std::to_string(outputs.size()) +
                          " of " + std::to_string(first.num_parties) + " parties");
  }
  const auto& field = params.field();
  ReconstructedOutput result;
  for (std::size_t o = 0; o < first.values.size(); ++o) {
    Fx2 sum{};
    for (const auto& out : outputs) sum = field.Add(sum, out.values[o]);
    result.field_values.push_back(sum);
    result.logits.push_back(DecodeFixed(sum, params));
  }
  result.predicted_class = Argmax(result.logits);
  return result;
}

}  // namespace polydnn

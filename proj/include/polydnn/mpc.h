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

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polydnn/compiler.h"
#include "polydnn/field.h"
#include "polydnn/fixed_point.h"
#include "polydnn/polyalg.h"
#include "polydnn/sharing.h"

namespace polydnn {

// Message channels audited by the transcript. Nothing in this library ever
// sends on kPartyToParty; the counter exists so tests can assert it stays 0.
enum class Channel {
  kPartyToParty,
  kDealerToParty,
  kDealerToClient,
  kClientToParty,
  kPartyToClient,
};

class Transcript {
 public:
  struct Counts {
    std::uint64_t party_to_party = 0;
    std::uint64_t dealer_to_party = 0;
    std::uint64_t dealer_to_client = 0;
    std::uint64_t client_to_party = 0;
    std::uint64_t party_to_client = 0;
  };

  void Record(Channel channel, std::uint64_t messages = 1);
  Counts counts() const;

 private:
  std::array<std::atomic<std::uint64_t>, 5> counters_{};
};

using Fingerprint = std::array<std::uint8_t, 32>;

std::string FingerprintHex(const Fingerprint& fp);
Fingerprint ParseFingerprintHex(std::string_view hex);

// The monomials of every output, known to all parties.
struct PublicStructure {
  std::size_t input_width = 0;
  std::vector<std::vector<Exponents>> monomials;  // [output][term]

  std::size_t term_count() const;
  std::uint32_t max_exponent() const;
  friend bool operator==(const PublicStructure&, const PublicStructure&) = default;
};

PublicStructure StructureOf(const ExpandedNetworkPoly& poly);

// SHA-256 over the structure and the sharing parameters.
Fingerprint ComputeFingerprint(const PublicStructure& structure,
                               const FixedPointParams& params,
                               std::uint32_t num_parties);

// Extra dealt material for secret-input evaluation. For every term t with
// exponent j >= 1 the dealer fixed a mask u_t; d_t = a_t - u_t is public.
struct ProductMaterial {
  std::vector<std::vector<Fx>> masked_coefficients;  // d, public
  std::vector<std::vector<Fx>> mask_shares;          // this party's share of u

  friend bool operator==(const ProductMaterial&, const ProductMaterial&) = default;
};

struct PartyProgram {
  std::uint32_t party_id = 0;
  std::uint32_t num_parties = 0;
  FixedPointParams params;
  PublicStructure structure;
  std::vector<std::vector<Fx>> coefficient_shares;  // aligned with monomials
  Fingerprint fingerprint{};
  std::optional<ProductMaterial> products;

  friend bool operator==(const PartyProgram&, const PartyProgram&) = default;
};

// Output of the dealer's setup for secret-input programs.
struct ProductSetup {
  std::vector<std::vector<Fx>> masks;                     // u, for the owner
  std::vector<std::vector<std::vector<Fx>>> mask_shares;  // [party][output][term]
};

// Encodes every coefficient and splits it into k additive shares.
std::vector<PartyProgram> DealProgram(const ExpandedNetworkPoly& poly,
                                      std::size_t k,
                                      const FixedPointParams& params,
                                      ShareRng& rng,
                                      Transcript* transcript = nullptr,
                                      const ProductSetup* setup = nullptr);

struct PartyOutput {
  std::uint32_t party_id = 0;
  std::uint32_t num_parties = 0;
  Fingerprint fingerprint{};
  std::vector<Fx2> values;  // one per output, scale 2^(2f)

  friend bool operator==(const PartyOutput&, const PartyOutput&) = default;
};

// Public monomial values encoded at scale 2^f, aligned with the structure.
// Powers are formed by repeated multiplication and multiplied across
// variables in index order.
std::vector<std::vector<Fx>> EncodeMonomials(const PublicStructure& structure,
                                             std::span<const double> x,
                                             const FixedPointParams& params);

// One party's local evaluation on a public input. Uses only the party's own
// program.
PartyOutput EvaluatePublicInput(const PartyProgram& program,
                                std::span<const double> x,
                                Transcript* transcript = nullptr);

struct ReconstructedOutput {
  std::vector<Fx2> field_values;
  std::vector<double> logits;
  std::size_t predicted_class = 0;
};

// Requires one output per party, all with the same fingerprint.
ReconstructedOutput ReconstructOutput(std::span<const PartyOutput> outputs,
                                      const FixedPointParams& params);

// ---- Secret-shared inputs ----

// Additive shares of x_v^j for j = 1..max_power, plus the public masked
// powers e_j = x^j - v_j once the client has applied the dealer's masks.
struct InputPowerShares {
  std::uint32_t party_id = 0;
  std::vector<std::vector<Fx>> powers;  // [variable][j - 1]
  std::vector<std::vector<Fx>> masked;  // [variable][j - 1], public
  std::optional<std::uint64_t> query_id;
};

std::vector<InputPowerShares> ShareInputPowers(std::span<const double> x,
                                               int max_power, std::size_t k,
                                               const FixedPointParams& params,
                                               ShareRng& rng,
                                               Transcript* transcript = nullptr);

// Per-query dealer output for one party: shares of w_t = u_t * v_j(t).
struct CorrelatedShares {
  std::uint32_t party_id = 0;
  std::uint64_t query_id = 0;
  std::vector<std::vector<Fx2>> product_shares;  // [output][term]
};

// Per-query dealer output for the client: the power masks v_j.
struct ClientMasks {
  std::uint64_t query_id = 0;
  std::vector<Fx> power_masks;  // [j - 1]
};

struct QueryMaterial {
  ClientMasks client;
  std::vector<CorrelatedShares> parties;
};

// Produces multiplication material so that parties can form shares of
// a_t * x^j from shares of a_t and x^j without talking to each other.
class ProductScheme {
 public:
  virtual ~ProductScheme() = default;
  virtual ProductSetup Setup(const PublicStructure& structure) = 0;
  virtual QueryMaterial NextQuery() = 0;
};

// Reference scheme: a dealer that never sees a coefficient or an input.
// Setup draws u_t per term (sent to the owner, and shared to parties). Each
// query draws v_j per power, hands v to the client and shares of u_t * v_j to
// the parties. Party share of a_t x^j is d_t [x^j] + e_j [u_t] + [w_t].
class TrustedDealerScheme final : public ProductScheme {
 public:
  TrustedDealerScheme(const FixedPointParams& params, std::size_t num_parties,
                      ShareRng rng, Transcript* transcript = nullptr);

  ProductSetup Setup(const PublicStructure& structure) override;
  QueryMaterial NextQuery() override;

 private:
  FixedPointParams params_;
  std::size_t num_parties_;
  ShareRng rng_;
  Transcript* transcript_;
  PublicStructure structure_;
  std::vector<std::vector<Fx>> masks_;
  std::uint64_t next_query_ = 0;
};

// Client side: fills the public masked powers of every party's bundle.
void MaskInputPowers(std::span<InputPowerShares> bundles,
                     const ClientMasks& masks, const FixedPointParams& params);

// One party's local evaluation of a univariate program on a secret input.
PartyOutput EvaluateSecretInput(const PartyProgram& program,
                                const InputPowerShares& input,
                                const CorrelatedShares& correlated,
                                Transcript* transcript = nullptr);

}  // namespace polydnn

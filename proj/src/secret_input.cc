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

#include <string>

#include "polydnn/errors.h"
#include "polydnn/mpc.h"

namespace polydnn {
namespace {

void RequireUnivariate(std::size_t width) {
  if (width != 1) {
    throw UnsupportedError("secret-input evaluation supports univariate "
                           "programs only; got " + std::to_string(width) +
                           " input variables");
  }
}

}  // namespace

std::vector<InputPowerShares> ShareInputPowers(std::span<const double> x,
                                               int max_power, std::size_t k,
                                               const FixedPointParams& params,
                                               ShareRng& rng,
                                               Transcript* transcript) {
  if (max_power < 1) throw ValidationError("max_power must be >= 1");
  if (k < 2) throw ValidationError("need at least 2 parties");
  std::vector<InputPowerShares> bundles(k);
  for (std::size_t i = 0; i < k; ++i) {
    bundles[i].party_id = static_cast<std::uint32_t>(i);
    bundles[i].powers.resize(x.size());
  }
  for (std::size_t v = 0; v < x.size(); ++v) {
    double power = 1.0;
    for (int j = 1; j <= max_power; ++j) {
      power *= x[v];
      Fx encoded;
      try {
        encoded = EncodeFixed(power, params);
      } catch (const FieldOverflowError& e) {
        throw FieldOverflowError("input power x^" + std::to_string(j) +
                                 " overflows; lower max_power or use a larger "
                                 "field (" + e.what() + ")");
      }
      const auto shares = SplitAdditive(encoded.raw, k, params.field(), rng);
      for (std::size_t i = 0; i < k; ++i) bundles[i].powers[v].push_back({shares[i]});
    }
  }
  if (transcript != nullptr) transcript->Record(Channel::kClientToParty, k);
  return bundles;
}

TrustedDealerScheme::TrustedDealerScheme(const FixedPointParams& params,
                                         std::size_t num_parties, ShareRng rng,
                                         Transcript* transcript)
    : params_(params),
      num_parties_(num_parties),
      rng_(rng),
      transcript_(transcript) {
  if (num_parties < 2) throw ValidationError("need at least 2 parties");
}

ProductSetup TrustedDealerScheme::Setup(const PublicStructure& structure) {
  RequireUnivariate(structure.input_width);
  structure_ = structure;
  masks_.clear();
  const auto& field = params_.field();
  ProductSetup setup;
  setup.mask_shares.assign(num_parties_, {});
  for (const auto& list : structure.monomials) {
    auto& masks = masks_.emplace_back();
    for (auto& party : setup.mask_shares) party.emplace_back();
    for (std::size_t t = 0; t < list.size(); ++t) {
      const Fx u{rng_.UniformBelow(field.modulus())};
      masks.push_back(u);
      const auto shares = SplitAdditive(u.raw, num_parties_, field, rng_);
      for (std::size_t i = 0; i < num_parties_; ++i) {
        setup.mask_shares[i].back().push_back({shares[i]});
      }
    }
  }
  setup.masks = masks_;
  if (transcript_ != nullptr) transcript_->Record(Channel::kDealerToParty, num_parties_);
  return setup;
}

QueryMaterial TrustedDealerScheme::NextQuery() {
  if (masks_.empty()) throw ValidationError("dealer setup has not run");
  const auto& field = params_.field();
  QueryMaterial q;
  q.client.query_id = next_query_;
  const std::uint32_t max_power = structure_.max_exponent();
  for (std::uint32_t j = 1; j <= max_power; ++j) {
    q.client.power_masks.push_back({rng_.UniformBelow(field.modulus())});
  }
  q.parties.resize(num_parties_);
  for (std::size_t i = 0; i < num_parties_; ++i) {
    q.parties[i].party_id = static_cast<std::uint32_t>(i);
    q.parties[i].query_id = next_query_;
  }
  for (std::size_t o = 0; o < structure_.monomials.size(); ++o) {
    for (auto& party : q.parties) party.product_shares.emplace_back();
    const auto& list = structure_.monomials[o];
    for (std::size_t t = 0; t < list.size(); ++t) {
      const std::uint32_t j = list[t][0];
      const Fx2 w = j == 0 ? Fx2{} : field.Mul(masks_[o][t], q.client.power_masks[j - 1]);
      const auto shares = SplitAdditive(w.raw, num_parties_, field, rng_);
      for (std::size_t i = 0; i < num_parties_; ++i) {
        q.parties[i].product_shares[o].push_back({shares[i]});
      }
    }
  }
  ++next_query_;
  if (transcript_ != nullptr) {
    transcript_->Record(Channel::kDealerToParty, num_parties_);
    transcript_->Record(Channel::kDealerToClient);
  }
  return q;
}

void MaskInputPowers(std::span<InputPowerShares> bundles,
                     const ClientMasks& masks, const FixedPointParams& params) {
  if (bundles.empty()) throw ValidationError("no input share bundles");
  RequireUnivariate(bundles.front().powers.size());
  const auto& field = params.field();
  const std::size_t needed = masks.power_masks.size();
  std::vector<Fx> masked(needed);
  for (std::size_t j = 0; j < needed; ++j) {
    Fx sum{};
    for (const auto& bundle : bundles) {
      if (bundle.powers.size() != 1 || bundle.powers[0].size() < needed) {
        throw ValidationError("input powers shared up to degree " +
                              std::to_string(bundle.powers.empty() ? 0 : bundle.powers[0].size()) +
                              ", program needs " + std::to_string(needed));
      }
      sum = field.Add(sum, bundle.powers[0][j]);
    }
    masked[j] = field.Sub(sum, masks.power_masks[j]);
  }
  for (auto& bundle : bundles) {
    bundle.masked = {masked};
    bundle.query_id = masks.query_id;
  }
}

PartyOutput EvaluateSecretInput(const PartyProgram& program,
                                const InputPowerShares& input,
                                const CorrelatedShares& correlated,
                                Transcript* transcript) {
  RequireUnivariate(program.structure.input_width);
  if (!program.products.has_value()) {
    throw ValidationError("party program was not dealt for secret inputs");
  }
  if (!input.query_id.has_value() || input.masked.empty()) {
    throw ValidationError("missing correlated randomness: input powers were "
                          "never masked");
  }
  if (*input.query_id != correlated.query_id) {
    throw ValidationError("missing correlated randomness for query " +
                          std::to_string(*input.query_id));
  }
  if (input.party_id != program.party_id ||
      correlated.party_id != program.party_id) {
    throw ValidationError("input or correlated shares belong to another party");
  }
  const auto& field = program.params.field();
  const auto& products = *program.products;
  const Fx one = EncodeOne(program.params);
  PartyOutput out;
  out.party_id = program.party_id;
  out.num_parties = program.num_parties;
  out.fingerprint = program.fingerprint;
  for (std::size_t o = 0; o < program.structure.monomials.size(); ++o) {
    const auto& list = program.structure.monomials[o];
    if (correlated.product_shares.size() <= o ||
        correlated.product_shares[o].size() != list.size()) {
      throw ValidationError("missing correlated randomness for output " +
                            std::to_string(o));
    }
    Fx2 acc{};
    for (std::size_t t = 0; t < list.size(); ++t) {
      const std::uint32_t j = list[t][0];
      if (j == 0) {
        acc = field.Add(acc, field.Mul(program.coefficient_shares[o][t], one));
        continue;
      }
      if (input.powers[0].size() < j || input.masked[0].size() < j) {
        throw ValidationError("input power x^" + std::to_string(j) +
                              " was not shared");
      }
      const Fx d = products.masked_coefficients[o][t];
      const Fx e = input.masked[0][j - 1];
      acc = field.Add(acc, field.Mul(d, input.powers[0][j - 1]));
      acc = field.Add(acc, field.Mul(e, products.mask_shares[o][t]));
      acc = field.Add(acc, correlated.product_shares[o][t]);
    }
    out.values.push_back(acc);
  }
  if (transcript != nullptr) transcript->Record(Channel::kPartyToClient);
  return out;
}

}  // namespace polydnn

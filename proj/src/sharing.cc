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

#include "polydnn/sharing.h"

#include <sodium.h>

#include <cstring>
#include <set>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

void EnsureSodium() {
  static const int status = sodium_init();
  if (status < 0) throw Error(ErrorCode::kIo, "libsodium failed to initialize");
}

int BitLength(u128 x) {
  int n = 0;
  while (x != 0) {
    ++n;
    x >>= 1;
  }
  return n;
}

}  // namespace

ShareRng::ShareRng(std::optional<std::uint64_t> seed) {
  EnsureSodium();
  if (seed.has_value()) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(*seed >> (8 * i));
    static constexpr unsigned char kContext[] = "polydnn share rng";
    crypto_generichash(key_.data(), key_.size(), bytes, sizeof bytes, kContext,
                       sizeof kContext - 1);
  } else {
    randombytes_buf(key_.data(), key_.size());
  }
}

void ShareRng::Refill() {
  unsigned char nonce[crypto_stream_chacha20_NONCEBYTES] = {};
  for (std::size_t i = 0; i < sizeof nonce; ++i) {
    nonce[i] = static_cast<unsigned char>(nonce_ >> (8 * i));
  }
  ++nonce_;
  crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce, key_.data());
  offset_ = 0;
}

std::uint64_t ShareRng::Next64() {
  if (offset_ + 8 > buffer_.size()) Refill();
  std::uint64_t v = 0;
  std::memcpy(&v, buffer_.data() + offset_, 8);
  offset_ += 8;
  return v;
}

u128 ShareRng::UniformBelow(u128 bound) {
  if (bound == 0) throw ValidationError("UniformBelow needs a positive bound");
  const int bits = BitLength(bound - 1);
  const u128 mask = bits >= 128 ? ~u128{0} : ((u128{1} << bits) - 1);
  while (true) {
    const u128 v = ((u128{Next64()} << 64) | Next64()) & mask;
    if (v < bound) return v;
  }
}

std::vector<u128> SplitAdditive(u128 secret, std::size_t k,
                                const PrimeField& field, ShareRng& rng) {
  if (k < 2) throw ValidationError("additive sharing needs at least 2 parties");
  std::vector<u128> shares(k);
  u128 sum = 0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    shares[i] = rng.UniformBelow(field.modulus());
    sum = field.Add(sum, shares[i]);
  }
  shares[k - 1] = field.Sub(field.Reduce(secret), sum);
  return shares;
}

template <Scale S>
std::vector<Share<S>> ShareSecret(FieldValue<S> secret, std::size_t k,
                                  const PrimeField& field, ShareRng& rng) {
  const auto raw = SplitAdditive(secret.raw, k, field, rng);
  std::vector<Share<S>> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = {static_cast<std::uint32_t>(i), {raw[i]}};
  }
  return out;
}

template <Scale S>
FieldValue<S> Reconstruct(std::span<const Share<S>> shares,
                          const PrimeField& field) {
  std::set<std::uint32_t> seen;
  u128 sum = 0;
  for (const auto& share : shares) {
    if (!seen.insert(share.party_id).second) {
      throw ValidationError("duplicate share for party " +
                            std::to_string(share.party_id));
    }
    sum = field.Add(sum, field.Reduce(share.value.raw));
  }
  return {sum};
}

template std::vector<Share<Scale::kSingle>> ShareSecret(Fx, std::size_t,
                                                        const PrimeField&,
                                                        ShareRng&);
template std::vector<Share<Scale::kDouble>> ShareSecret(Fx2, std::size_t,
                                                        const PrimeField&,
                                                        ShareRng&);
template Fx Reconstruct(std::span<const Share<Scale::kSingle>>,
                        const PrimeField&);
template Fx2 Reconstruct(std::span<const Share<Scale::kDouble>>,
                         const PrimeField&);

}  // namespace polydnn

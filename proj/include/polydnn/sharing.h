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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polydnn/field.h"

namespace polydnn {

// ChaCha20 keystream generator. Seeded instances are reproducible; unseeded
// ones draw their key from the OS.
class ShareRng {
 public:
  explicit ShareRng(std::optional<std::uint64_t> seed = std::nullopt);

  std::uint64_t Next64();
  // Uniform in [0, bound) by rejection sampling.
  u128 UniformBelow(u128 bound);

 private:
  void Refill();

  std::array<unsigned char, 32> key_{};
  std::uint64_t nonce_ = 0;
  std::array<unsigned char, 4096> buffer_{};
  std::size_t offset_ = buffer_.size();
};

template <Scale S>
struct Share {
  std::uint32_t party_id = 0;
  FieldValue<S> value;

  friend bool operator==(const Share&, const Share&) = default;
};

// Additive k-of-k sharing: the first k - 1 shares are uniform, the last one
// makes the sum equal the secret.
template <Scale S>
std::vector<Share<S>> ShareSecret(FieldValue<S> secret, std::size_t k,
                                  const PrimeField& field, ShareRng& rng);

// Sum of the shares. Throws on duplicate party ids.
template <Scale S>
FieldValue<S> Reconstruct(std::span<const Share<S>> shares,
                          const PrimeField& field);

// Raw variant used by the typed templates.
std::vector<u128> SplitAdditive(u128 secret, std::size_t k,
                                const PrimeField& field, ShareRng& rng);

}  // namespace polydnn

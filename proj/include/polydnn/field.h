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

#include <cstdint>
#include <string>
#include <string_view>

namespace polydnn {

using u128 = unsigned __int128;

std::string ToDecimal(u128 value);
// Throws ParseError on anything but a plain decimal that fits in 128 bits.
u128 ParseDecimal(std::string_view text);

// Fixed-point scale carried by a field value: 2^f or 2^(2f).
enum class Scale { kSingle, kDouble };

// A field element tagged with its fixed-point scale. Values at different
// scales do not mix: there is no operator between them.
template <Scale S>
struct FieldValue {
  u128 raw = 0;

  friend bool operator==(const FieldValue&, const FieldValue&) = default;
};

using Fx = FieldValue<Scale::kSingle>;
using Fx2 = FieldValue<Scale::kDouble>;

// Arithmetic modulo the Mersenne prime 2^bits - 1.
class PrimeField {
 public:
  // bits must be one of 61, 89, 107, 127.
  explicit PrimeField(int bits = 127);

  int bits() const { return bits_; }
  u128 modulus() const { return modulus_; }

  u128 Reduce(u128 x) const;
  u128 Add(u128 a, u128 b) const { return Reduce(a + b); }
  u128 Sub(u128 a, u128 b) const { return Add(a, modulus_ - b); }
  u128 Neg(u128 a) const { return a == 0 ? 0 : modulus_ - a; }
  u128 Mul(u128 a, u128 b) const;
  bool Contains(u128 a) const { return a < modulus_; }

  template <Scale S>
  FieldValue<S> Add(FieldValue<S> a, FieldValue<S> b) const {
    return {Add(a.raw, b.raw)};
  }
  template <Scale S>
  FieldValue<S> Sub(FieldValue<S> a, FieldValue<S> b) const {
    return {Sub(a.raw, b.raw)};
  }
  // Integer multiple; keeps the scale.
  template <Scale S>
  FieldValue<S> MulPlain(FieldValue<S> a, u128 k) const {
    return {Mul(a.raw, Reduce(k))};
  }
  // The only way to reach scale 2f.
  Fx2 Mul(Fx a, Fx b) const { return {Mul(a.raw, b.raw)}; }

 private:
  int bits_;
  u128 modulus_;
};

bool IsSupportedFieldBits(int bits);

}  // namespace polydnn

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

#include "polydnn/field.h"

#include <algorithm>

#include "polydnn/errors.h"

namespace polydnn {

std::string ToDecimal(u128 value) {
  if (value == 0) return "0";
  std::string out;
  while (value != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 ParseDecimal(std::string_view text) {
  if (text.empty()) throw ParseError("empty decimal field element");
  const u128 max = ~u128{0};
  u128 value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw ParseError("bad decimal field element '" + std::string(text) + "'");
    }
    const auto digit = static_cast<unsigned>(c - '0');
    if (value > (max - digit) / 10) {
      throw ParseError("decimal field element overflows 128 bits");
    }
    value = value * 10 + digit;
  }
  return value;
}

bool IsSupportedFieldBits(int bits) {
  return bits == 61 || bits == 89 || bits == 107 || bits == 127;
}

PrimeField::PrimeField(int bits) : bits_(bits) {
  if (!IsSupportedFieldBits(bits)) {
    throw ValidationError("unsupported field size 2^" + std::to_string(bits) +
                          "-1; use 61, 89, 107 or 127");
  }
  modulus_ = (u128{1} << bits) - 1;
}

u128 PrimeField::Reduce(u128 x) const {
  // x mod 2^q - 1 by folding the high bits onto the low bits.
  x = (x & modulus_) + (x >> bits_);
  x = (x & modulus_) + (x >> bits_);
  return x >= modulus_ ? x - modulus_ : x;
}

u128 PrimeField::Mul(u128 a, u128 b) const {
  a = Reduce(a);
  b = Reduce(b);
  // 256-bit product from 64-bit limbs.
  const std::uint64_t a0 = static_cast<std::uint64_t>(a), a1 = static_cast<std::uint64_t>(a >> 64);
  const std::uint64_t b0 = static_cast<std::uint64_t>(b), b1 = static_cast<std::uint64_t>(b >> 64);
  const u128 p00 = u128{a0} * b0;
  const u128 p01 = u128{a0} * b1;
  const u128 p10 = u128{a1} * b0;
  const u128 p11 = u128{a1} * b1;
  const u128 mid = (p00 >> 64) + static_cast<std::uint64_t>(p01) +
                   static_cast<std::uint64_t>(p10);
  const u128 lo = (mid << 64) | static_cast<std::uint64_t>(p00);
  const u128 hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);

  // product = hi * 2^128 + lo. With 2^q == 1, 2^128 == 2^(128 - q).
  const int shift = 128 - bits_;
  // hi < 2^(2q - 128) so hi << shift < 2^q fits; fold lo first.
  const u128 lo_red = Reduce(lo);
  const u128 hi_red = Reduce(Reduce(hi) << shift);
  return Add(lo_red, hi_red);
}

}  // namespace polydnn

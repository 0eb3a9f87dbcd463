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

#include "polydnn/fixed_point.h"

#include <cmath>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {

FixedPointParams::FixedPointParams(int field_bits, int frac_bits)
    : field_(field_bits), frac_bits_(frac_bits) {
  // 2 * M * 2^(2f) < p with M a power of two.
  const int headroom = field_bits - 2 - 2 * frac_bits;
  if (frac_bits < 1 || headroom < 0) {
    throw ValidationError("frac_bits " + std::to_string(frac_bits) +
                          " leaves no headroom in a " +
                          std::to_string(field_bits) + "-bit field");
  }
  max_magnitude_ = std::ldexp(1.0, headroom);
}

Fx EncodeFixed(double v, const FixedPointParams& params) {
  if (!std::isfinite(v) || std::abs(v) > params.max_magnitude()) {
    throw FieldOverflowError(
        "value " + std::to_string(v) + " exceeds the fixed-point bound " +
        std::to_string(params.max_magnitude()) + " (2^" +
        std::to_string(params.field_bits() - 2 - 2 * params.frac_bits()) +
        "); use a larger field or fewer fractional bits");
  }
  const double scaled = std::round(std::ldexp(v, params.frac_bits()));
  const auto magnitude = static_cast<u128>(std::abs(scaled));
  const auto& field = params.field();
  return {scaled < 0 ? field.Neg(field.Reduce(magnitude)) : field.Reduce(magnitude)};
}

Fx EncodeOne(const FixedPointParams& params) {
  return {u128{1} << params.frac_bits()};
}

long double CenteredLift(u128 raw, const PrimeField& field) {
  const u128 p = field.modulus();
  raw = field.Reduce(raw);
  if (raw > p / 2) return -static_cast<long double>(p - raw);
  return static_cast<long double>(raw);
}

double DecodeFixed(Fx value, const FixedPointParams& params) {
  return static_cast<double>(
      std::ldexp(CenteredLift(value.raw, params.field()), -params.frac_bits()));
}

double DecodeFixed(Fx2 value, const FixedPointParams& params) {
  return static_cast<double>(std::ldexp(CenteredLift(value.raw, params.field()),
                                        -2 * params.frac_bits()));
}

}  // namespace polydnn

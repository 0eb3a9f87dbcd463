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

#include "polydnn/field.h"

namespace polydnn {

// Fixed-point encoding parameters. A real v is encoded as round(v * 2^f) in
// the field; negatives wrap to p - |.|. max_magnitude is the largest |v|
// accepted by EncodeFixed, chosen so that products at scale 2^(2f) still
// decode unambiguously.
class FixedPointParams {
 public:
  explicit FixedPointParams(int field_bits = 127, int frac_bits = 24);

  const PrimeField& field() const { return field_; }
  int field_bits() const { return field_.bits(); }
  int frac_bits() const { return frac_bits_; }
  double max_magnitude() const { return max_magnitude_; }

  friend bool operator==(const FixedPointParams& a, const FixedPointParams& b) {
    return a.field_bits() == b.field_bits() && a.frac_bits_ == b.frac_bits_;
  }

 private:
  PrimeField field_;
  int frac_bits_;
  double max_magnitude_;
};

// Throws FieldOverflowError when |v| exceeds the magnitude bound.
Fx EncodeFixed(double v, const FixedPointParams& params);

// A public integer constant at scale 2^f, e.g. the encoding of 1.
Fx EncodeOne(const FixedPointParams& params);

// Centered lift to (-p/2, p/2), then division by 2^f or 2^(2f).
double DecodeFixed(Fx value, const FixedPointParams& params);
double DecodeFixed(Fx2 value, const FixedPointParams& params);

// Signed integer value of the centered lift.
long double CenteredLift(u128 raw, const PrimeField& field);

}  // namespace polydnn

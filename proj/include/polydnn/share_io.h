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

#include <filesystem>

#include "json.hpp"
#include "polydnn/mpc.h"

namespace polydnn {

enum class ShareFileFormat { kBinary, kText };

// Binary layout (little-endian):
//   "PDNNSHR1" | u32 party_id | u32 k | u32 field_bits | u32 frac_bits
//   | 32-byte fingerprint | u32 input_width | u32 outputs
//   | per output: u32 terms, per term: u32 exps[input_width], 16-byte share
//   | u8 has_products [per term: 16-byte d, 16-byte mask share]
// Text is JSON with field elements as decimal strings.
void SavePartyProgram(const PartyProgram& program,
                      const std::filesystem::path& path,
                      ShareFileFormat format = ShareFileFormat::kBinary);
// Detects the format from the leading bytes. Throws FingerprintMismatchError
// when the stored fingerprint does not match the stored structure.
PartyProgram LoadPartyProgram(const std::filesystem::path& path);

nlohmann::json PartyOutputToJson(const PartyOutput& output,
                                 const FixedPointParams& params);
PartyOutput PartyOutputFromJson(const nlohmann::json& doc,
                                FixedPointParams* params = nullptr);

}  // namespace polydnn

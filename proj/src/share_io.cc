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

#include "polydnn/share_io.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "polydnn/errors.h"
#include "polydnn/program_io.h"

namespace polydnn {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "PDNNSHR1";
constexpr const char* kTextFormat = "polydnn-party-program";
constexpr const char* kOutputFormat = "polydnn-output-share";

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void Element(u128 v) {
    for (int i = 0; i < 16; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void Raw(const void* data, std::size_t n) {
    bytes_.append(static_cast<const char*>(data), n);
  }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::uint8_t U8() {
    Need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t U32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{U8()} << (8 * i);
    return v;
  }
  u128 Element() {
    u128 v = 0;
    for (int i = 0; i < 16; ++i) v |= u128{U8()} << (8 * i);
    return v;
  }
  void Raw(void* out, std::size_t n) {
    Need(n);
    std::copy_n(bytes_.data() + pos_, n, static_cast<char*>(out));
    pos_ += n;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError("share file is truncated");
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

Fx CheckedElement(u128 v, const PrimeField& field) {
  if (!field.Contains(v)) throw ParseError("share value is not a field element");
  return {v};
}

json ElementsToJson(const std::vector<std::vector<Fx>>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (const auto& v : row) r.push_back(ToDecimal(v.raw));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<Fx>> ElementsFromJson(const json& rows,
                                              const PrimeField& field) {
  std::vector<std::vector<Fx>> out;
  for (const auto& row : rows) {
    auto& r = out.emplace_back();
    for (const auto& v : row) {
      r.push_back(CheckedElement(ParseDecimal(v.get<std::string>()), field));
    }
  }
  return out;
}

void CheckConsistency(const PartyProgram& p) {
  if (p.num_parties < 2 || p.party_id >= p.num_parties) {
    throw ValidationError("share file has party id " +
                          std::to_string(p.party_id) + " of " +
                          std::to_string(p.num_parties));
  }
  if (p.coefficient_shares.size() != p.structure.monomials.size()) {
    throw ParseError("share file output count mismatch");
  }
  for (std::size_t o = 0; o < p.coefficient_shares.size(); ++o) {
    if (p.coefficient_shares[o].size() != p.structure.monomials[o].size()) {
      throw ParseError("share count differs from monomial count");
    }
  }
  if (ComputeFingerprint(p.structure, p.params, p.num_parties) != p.fingerprint) {
    throw FingerprintMismatchError(
        "share file fingerprint does not match its public structure");
  }
}

std::string EncodeBinary(const PartyProgram& p) {
  Writer w;
  w.Raw(kMagic.data(), kMagic.size());
  w.U32(p.party_id);
  w.U32(p.num_parties);
  w.U32(static_cast<std::uint32_t>(p.params.field_bits()));
  w.U32(static_cast<std::uint32_t>(p.params.frac_bits()));
  w.Raw(p.fingerprint.data(), p.fingerprint.size());
  w.U32(static_cast<std::uint32_t>(p.structure.input_width));
  w.U32(static_cast<std::uint32_t>(p.structure.monomials.size()));
  for (std::size_t o = 0; o < p.structure.monomials.size(); ++o) {
    const auto& list = p.structure.monomials[o];
    w.U32(static_cast<std::uint32_t>(list.size()));
    for (std::size_t t = 0; t < list.size(); ++t) {
      for (auto e : list[t]) w.U32(e);
      w.Element(p.coefficient_shares[o][t].raw);
    }
  }
  w.U8(p.products.has_value() ? 1 : 0);
  if (p.products.has_value()) {
    for (std::size_t o = 0; o < p.structure.monomials.size(); ++o) {
      for (std::size_t t = 0; t < p.structure.monomials[o].size(); ++t) {
        w.Element(p.products->masked_coefficients[o][t].raw);
        w.Element(p.products->mask_shares[o][t].raw);
      }
    }
  }
  return w.bytes();
}

PartyProgram DecodeBinary(std::string bytes) {
  Reader r(std::move(bytes));
  std::array<char, 8> magic{};
  r.Raw(magic.data(), magic.size());
  PartyProgram p;
  p.party_id = r.U32();
  p.num_parties = r.U32();
  const int field_bits = static_cast<int>(r.U32());
  const int frac_bits = static_cast<int>(r.U32());
  p.params = FixedPointParams(field_bits, frac_bits);
  const auto& field = p.params.field();
  r.Raw(p.fingerprint.data(), p.fingerprint.size());
  p.structure.input_width = r.U32();
  const std::uint32_t outputs = r.U32();
  for (std::uint32_t o = 0; o < outputs; ++o) {
    auto& list = p.structure.monomials.emplace_back();
    auto& shares = p.coefficient_shares.emplace_back();
    const std::uint32_t terms = r.U32();
    for (std::uint32_t t = 0; t < terms; ++t) {
      Exponents exps(p.structure.input_width);
      for (auto& e : exps) e = r.U32();
      list.push_back(std::move(exps));
      shares.push_back(CheckedElement(r.Element(), field));
    }
  }
  if (r.U8() != 0) {
    ProductMaterial m;
    for (const auto& list : p.structure.monomials) {
      auto& d = m.masked_coefficients.emplace_back();
      auto& u = m.mask_shares.emplace_back();
      for (std::size_t t = 0; t < list.size(); ++t) {
        d.push_back(CheckedElement(r.Element(), field));
        u.push_back(CheckedElement(r.Element(), field));
      }
    }
    p.products = std::move(m);
  }
  if (!r.AtEnd()) throw ParseError("trailing bytes in share file");
  return p;
}

json EncodeText(const PartyProgram& p) {
  json outputs = json::array();
  for (std::size_t o = 0; o < p.structure.monomials.size(); ++o) {
    json terms = json::array();
    for (std::size_t t = 0; t < p.structure.monomials[o].size(); ++t) {
      terms.push_back({{"exps", p.structure.monomials[o][t]},
                       {"share", ToDecimal(p.coefficient_shares[o][t].raw)}});
    }
    outputs.push_back(std::move(terms));
  }
  json doc = {{"format", kTextFormat},
              {"party_id", p.party_id},
              {"k", p.num_parties},
              {"p", ToDecimal(p.params.field().modulus())},
              {"field_bits", p.params.field_bits()},
              {"frac_bits", p.params.frac_bits()},
              {"fingerprint", FingerprintHex(p.fingerprint)},
              {"input_width", p.structure.input_width},
              {"outputs", outputs}};
  if (p.products.has_value()) {
    doc["products"] = {
        {"masked_coefficients", ElementsToJson(p.products->masked_coefficients)},
        {"mask_shares", ElementsToJson(p.products->mask_shares)}};
  }
  return doc;
}

PartyProgram DecodeText(const json& doc) {
  if (doc.value("format", std::string{}) != kTextFormat) {
    throw ParseError("not a party share file (format field)");
  }
  PartyProgram p;
  p.party_id = doc.at("party_id").get<std::uint32_t>();
  p.num_parties = doc.at("k").get<std::uint32_t>();
  p.params = FixedPointParams(doc.at("field_bits").get<int>(),
                              doc.at("frac_bits").get<int>());
  const auto& field = p.params.field();
  if (ParseDecimal(doc.at("p").get<std::string>()) != field.modulus()) {
    throw ParseError("share file modulus disagrees with field_bits");
  }
  p.fingerprint = ParseFingerprintHex(doc.at("fingerprint").get<std::string>());
  p.structure.input_width = doc.at("input_width").get<std::size_t>();
  for (const auto& out : doc.at("outputs")) {
    auto& list = p.structure.monomials.emplace_back();
    auto& shares = p.coefficient_shares.emplace_back();
    for (const auto& t : out) {
      auto exps = t.at("exps").get<Exponents>();
      if (exps.size() != p.structure.input_width) {
        throw ParseError("exponent vector width mismatch in share file");
      }
      list.push_back(std::move(exps));
      shares.push_back(CheckedElement(ParseDecimal(t.at("share").get<std::string>()), field));
    }
  }
  if (doc.contains("products")) {
    const auto& m = doc.at("products");
    p.products = ProductMaterial{
        ElementsFromJson(m.at("masked_coefficients"), field),
        ElementsFromJson(m.at("mask_shares"), field)};
  }
  return p;
}

}  // namespace

void SavePartyProgram(const PartyProgram& program,
                      const std::filesystem::path& path,
                      ShareFileFormat format) {
  if (format == ShareFileFormat::kText) {
    WriteJsonFile(EncodeText(program), path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string bytes = EncodeBinary(program);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

PartyProgram LoadPartyProgram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  PartyProgram p;
  try {
    if (bytes.compare(0, kMagic.size(), kMagic) == 0) {
      p = DecodeBinary(std::move(bytes));
    } else {
      p = DecodeText(json::parse(bytes));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  CheckConsistency(p);
  return p;
}

json PartyOutputToJson(const PartyOutput& output, const FixedPointParams& params) {
  json values = json::array();
  for (const auto& v : output.values) values.push_back(ToDecimal(v.raw));
  return {{"format", kOutputFormat},
          {"party_id", output.party_id},
          {"k", output.num_parties},
          {"field_bits", params.field_bits()},
          {"frac_bits", params.frac_bits()},
          {"fingerprint", FingerprintHex(output.fingerprint)},
          {"scale", "2f"},
          {"values", values}};
}

PartyOutput PartyOutputFromJson(const json& doc, FixedPointParams* params) {
  try {
    if (doc.value("format", std::string{}) != kOutputFormat) {
      throw ParseError("not an output-share file (format field)");
    }
    const FixedPointParams p(doc.at("field_bits").get<int>(),
                             doc.at("frac_bits").get<int>());
    PartyOutput out;
    out.party_id = doc.at("party_id").get<std::uint32_t>();
    out.num_parties = doc.at("k").get<std::uint32_t>();
    out.fingerprint = ParseFingerprintHex(doc.at("fingerprint").get<std::string>());
    for (const auto& v : doc.at("values")) {
      const u128 raw = ParseDecimal(v.get<std::string>());
      if (!p.field().Contains(raw)) throw ParseError("output share is not a field element");
      out.values.push_back({raw});
    }
    if (params != nullptr) *params = p;
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("output-share file: ") + e.what());
  }
}

}  // namespace polydnn

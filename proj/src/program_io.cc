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

#include "polydnn/program_io.h"

#include <fstream>
#include <string>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

using nlohmann::json;

constexpr const char* kProgramFormat = "polydnn-program";
constexpr int kProgramVersion = 1;

json OperandsToJson(const std::vector<Operand>& ops) {
  json out = json::array();
  for (const auto& op : ops) {
    out.push_back({{"src", op.source == Operand::Source::kInput ? "x" : "n"},
                   {"index", op.index},
                   {"w", op.weight}});
  }
  return out;
}

std::vector<Operand> OperandsFromJson(const json& arr) {
  std::vector<Operand> ops;
  for (const auto& o : arr) {
    Operand op;
    const auto src = o.at("src").get<std::string>();
    if (src == "x") {
      op.source = Operand::Source::kInput;
    } else if (src == "n") {
      op.source = Operand::Source::kNode;
    } else {
      throw ParseError("operand src must be 'x' or 'n', got '" + src + "'");
    }
    op.index = o.at("index").get<std::size_t>();
    op.weight = o.at("w").get<double>();
    ops.push_back(op);
  }
  return ops;
}

}  // namespace

json PolyToJson(const SparseMultiPoly& poly) {
  json terms = json::array();
  for (const auto& [exps, coeff] : poly.terms()) {
    terms.push_back({{"exps", exps}, {"coeff", coeff}});
  }
  return {{"num_vars", poly.num_vars()}, {"terms", terms}};
}

SparseMultiPoly PolyFromJson(const json& doc) try {
  const auto num_vars = doc.at("num_vars").get<std::size_t>();
  SparseMultiPoly::TermMap terms;
  for (const auto& t : doc.at("terms")) {
    auto exps = t.at("exps").get<Exponents>();
    if (exps.size() != num_vars) {
      throw ParseError("polynomial term has " + std::to_string(exps.size()) +
                       " exponents, expected " + std::to_string(num_vars));
    }
    if (!terms.emplace(std::move(exps), t.at("coeff").get<double>()).second) {
      throw ParseError("polynomial has a repeated exponent vector");
    }
  }
  return SparseMultiPoly::FromTermMap(num_vars, std::move(terms));
} catch (const json::exception& e) {
  throw ParseError(std::string("polynomial: ") + e.what());
}

json ArtifactToJson(const ProgramArtifact& artifact) {
  const auto& p = artifact.program;
  json nodes = json::array();
  for (const auto& n : p.nodes) {
    json node = {{"id", n.id},
                 {"layer", n.layer},
                 {"unit", n.unit},
                 {"inputs", OperandsToJson(n.inputs)},
                 {"bias", n.bias},
                 {"activation", n.activation.coeffs()}};
    if (!n.linear.empty()) node["linear"] = OperandsToJson(n.linear);
    if (n.is_pseudo) node["pseudo"] = true;
    if (n.is_helper) node["helper"] = true;
    nodes.push_back(std::move(node));
  }
  json reports = json::array();
  for (const auto& r : p.reports) {
    reports.push_back({{"layer", r.layer},
                       {"kind", LayerKindName(r.kind)},
                       {"activation", ActivationName(r.activation)},
                       {"degree", r.degree},
                       {"radius", r.radius},
                       {"max_err", r.fit.max_abs_error},
                       {"mean_err", r.fit.mean_abs_error},
                       {"grid_points", r.fit.grid_points},
                       {"nodes", r.nodes}});
  }
  json doc = {{"format", kProgramFormat},
              {"version", kProgramVersion},
              {"input_width", p.input_width},
              {"softmax_mode", SoftmaxModeName(p.softmax_mode)},
              {"degree", p.degree},
              {"intervals", p.intervals},
              {"outputs", p.output_node_ids},
              {"nodes", nodes},
              {"reports", reports}};
  if (artifact.expanded.has_value()) {
    json outs = json::array();
    for (const auto& poly : artifact.expanded->outputs) outs.push_back(PolyToJson(poly));
    doc["expanded"] = {{"input_width", artifact.expanded->input_width},
                       {"total_degree", artifact.expanded->total_degree},
                       {"term_count", artifact.expanded->term_count},
                       {"outputs", outs}};
  }
  return doc;
}

ProgramArtifact ArtifactFromJson(const json& doc) {
  try {
    if (doc.value("format", std::string{}) != kProgramFormat) {
      throw ParseError("not a program artifact (format field)");
    }
    if (doc.at("version").get<int>() != kProgramVersion) {
      throw ParseError("unsupported program artifact version");
    }
    ProgramArtifact a;
    auto& p = a.program;
    p.input_width = doc.at("input_width").get<std::size_t>();
    p.softmax_mode = ParseSoftmaxMode(doc.at("softmax_mode").get<std::string>());
    p.degree = doc.at("degree").get<int>();
    p.intervals = doc.at("intervals").get<std::vector<double>>();
    p.output_node_ids = doc.at("outputs").get<std::vector<std::size_t>>();
    for (const auto& n : doc.at("nodes")) {
      PolyNode node;
      node.id = n.at("id").get<std::size_t>();
      node.layer = n.at("layer").get<std::size_t>();
      node.unit = n.at("unit").get<std::size_t>();
      node.inputs = OperandsFromJson(n.at("inputs"));
      node.bias = n.at("bias").get<double>();
      node.activation = UniPoly(n.at("activation").get<std::vector<double>>());
      if (n.contains("linear")) node.linear = OperandsFromJson(n.at("linear"));
      node.is_pseudo = n.value("pseudo", false);
      node.is_helper = n.value("helper", false);
      p.nodes.push_back(std::move(node));
    }
    if (doc.contains("reports")) {
      for (const auto& r : doc.at("reports")) {
        LayerReport rep;
        rep.layer = r.at("layer").get<std::size_t>();
        rep.kind = ParseLayerKind(r.at("kind").get<std::string>());
        rep.activation = ParseActivation(r.at("activation").get<std::string>());
        rep.degree = r.at("degree").get<int>();
        rep.radius = r.at("radius").get<double>();
        rep.fit.max_abs_error = r.at("max_err").get<double>();
        rep.fit.mean_abs_error = r.at("mean_err").get<double>();
        rep.fit.grid_points = r.at("grid_points").get<std::size_t>();
        rep.fit.interval = {-rep.radius, rep.radius};
        rep.nodes = r.at("nodes").get<std::size_t>();
        p.reports.push_back(rep);
      }
    }
    Validate(p);
    if (doc.contains("expanded")) {
      const auto& e = doc.at("expanded");
      ExpandedNetworkPoly poly;
      poly.input_width = e.at("input_width").get<std::size_t>();
      poly.total_degree = e.at("total_degree").get<std::uint32_t>();
      poly.term_count = e.at("term_count").get<std::size_t>();
      for (const auto& o : e.at("outputs")) {
        poly.outputs.push_back(PolyFromJson(o));
        if (poly.outputs.back().num_vars() != poly.input_width) {
          throw ParseError("expanded output polynomial width mismatch");
        }
      }
      a.expanded = std::move(poly);
    }
    return a;
  } catch (const json::exception& e) {
    throw ParseError(std::string("program artifact: ") + e.what());
  }
}

void SaveArtifact(const ProgramArtifact& artifact,
                  const std::filesystem::path& path) {
  WriteJsonFile(ArtifactToJson(artifact), path);
}

ProgramArtifact LoadArtifact(const std::filesystem::path& path) {
  return ArtifactFromJson(ReadJsonFile(path));
}

void WriteCompileReport(std::ostream& out, const ProgramArtifact& artifact) {
  out << "layer,kind,activation,degree,interval,max_err,mean_err,nodes,"
         "term_count\n";
  out.precision(10);
  for (const auto& r : artifact.program.reports) {
    out << r.layer << ',' << LayerKindName(r.kind) << ','
        << ActivationName(r.activation) << ',' << r.degree << ',' << r.radius
        << ',' << r.fit.max_abs_error << ',' << r.fit.mean_abs_error << ','
        << r.nodes << ',';
    if (artifact.expanded.has_value()) out << artifact.expanded->term_count;
    out << '\n';
  }
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace polydnn

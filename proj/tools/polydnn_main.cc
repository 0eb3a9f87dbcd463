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

// polydnn: compile networks to polynomials and run the share-file pipeline.
//
// Exit codes: 0 ok, 1 I/O, 2 validation, 3 expansion too large,
// 4 field overflow, 5 fingerprint mismatch.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polydnn/errors.h"
#include "polydnn/harness.h"
#include "polydnn/model_io.h"
#include "polydnn/mpc.h"
#include "polydnn/program_io.h"
#include "polydnn/share_io.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polydnn;

namespace {

struct Common {
  std::string model;
  std::string data;
  std::string program;
  std::string out;
  std::optional<std::uint64_t> seed;
  int field_bits = 127;
  int frac_bits = 24;
};

std::vector<double> ParseReals(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ParseError("not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<int> ParseInts(const std::string& text) {
  std::vector<int> out;
  for (double v : ParseReals(text)) {
    if (v != static_cast<int>(v)) throw ParseError("expected integers: " + text);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Dataset LoadData(const std::string& path) {
  return LoadDataset(path, GuessDatasetFormat(path));
}

// Picks the evaluation input from --input or --data/--row.
std::vector<double> SelectInput(const std::string& input, const std::string& data,
                                std::size_t row) {
  if (!input.empty()) return ParseReals(input);
  if (data.empty()) throw ValidationError("give --input or --data with --row");
  const Dataset d = LoadData(data);
  if (row >= d.size()) {
    throw ValidationError("row " + std::to_string(row) + " out of range (" +
                          std::to_string(d.size()) + " rows)");
  }
  return d.inputs[row];
}

void Emit(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(1) << '\n';
  } else {
    WriteJsonFile(doc, out);
  }
}

PoolMode ParsePoolFlag(const std::string& s) {
  return s == "mean" ? PoolMode::kMean : PoolMode::kEq2;
}

json ClassJson(const std::vector<double>& logits, std::size_t cls) {
  return {{"logits", logits}, {"class", cls}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile neural networks to polynomials and evaluate them on "
               "additive shares."};
  app.require_subcommand(1);
  Common c;

  auto seed_opt = [&](CLI::App* cmd) {
    cmd->add_option("--seed", c.seed, "RNG seed")->envname("POLYDNN_SEED");
  };
  auto field_opts = [&](CLI::App* cmd) {
    cmd->add_option("--field-bits", c.field_bits, "Mersenne exponent of the field prime")
        ->check(CLI::IsMember({61, 89, 107, 127}));
    cmd->add_option("--frac-bits", c.frac_bits, "fixed-point fractional bits")
        ->check(CLI::PositiveNumber);
  };

  CompileSettings settings;
  std::string pool_mode = "eq2";
  std::string softmax_mode = "drop";
  std::string report_path;
  auto compile_opts = [&](CLI::App* cmd) {
    cmd->add_option("--pool-mode", pool_mode, "max-pool lowering")
        ->check(CLI::IsMember({"mean", "eq2"}));
    cmd->add_option("--softmax-mode", softmax_mode, "softmax output handling")
        ->check(CLI::IsMember({"drop", "none"}));
  };

  auto* compile = app.add_subcommand("compile", "compile a model to a program artifact");
  compile->add_option("--model", c.model, "model file")->required();
  compile->add_option("--data", c.data, "calibration dataset (idx or csv)");
  compile->add_option("--degree", settings.degree, "activation polynomial degree")
      ->check(CLI::Range(1, 40));
  compile->add_flag("--expand", settings.expand, "also expand to one polynomial per output");
  compile->add_option("--pseudo-units", settings.pseudo_units,
                      "pseudo-units spread over the hidden dense layers");
  compile->add_option("--out", c.out, "artifact path")->required();
  compile->add_option("--report", report_path, "compile report CSV (default: <out>.report.csv)");
  compile_opts(compile);
  seed_opt(compile);

  std::string input;
  std::size_t row = 0;
  auto* eval = app.add_subcommand("eval", "evaluate a model or program in the clear");
  eval->add_option("--model", c.model, "model file (reference inference)");
  eval->add_option("--program", c.program, "program artifact");
  eval->add_option("--input", input, "comma-separated input vector");
  eval->add_option("--data", c.data, "dataset to take --row from");
  eval->add_option("--row", row, "dataset row");
  eval->add_option("--out", c.out, "output JSON (default stdout)");
  field_opts(eval);

  std::string degrees_text;
  SweepConfig sweep_config;
  auto* sweep = app.add_subcommand("sweep", "agreement with the reference across degrees");
  sweep->add_option("--model", c.model, "model file")->required();
  sweep->add_option("--data", c.data, "dataset")->required();
  sweep->add_option("--degrees", degrees_text, "comma-separated ascending degrees");
  sweep->add_option("--runs", sweep_config.runs, "runs")->check(CLI::PositiveNumber);
  sweep->add_option("--samples", sweep_config.samples_per_run, "samples per run")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--with-replacement", sweep_config.with_replacement,
                  "sample with replacement");
  sweep->add_option("--threads", sweep_config.threads, "worker threads (0: all cores)");
  sweep->add_option("--out", c.out, "CSV path (default stdout)");
  compile_opts(sweep);
  seed_opt(sweep);

  std::size_t parties = 3;
  std::string share_format = "binary";
  auto* share = app.add_subcommand("share", "deal an expanded program to k parties");
  share->add_option("--program", c.program, "expanded program artifact")->required();
  share->add_option("--parties", parties, "party count k")->check(CLI::Range(2, 1000));
  share->add_option("--out", c.out, "output directory")->required();
  share->add_option("--format", share_format, "share file format")
      ->check(CLI::IsMember({"binary", "text"}));
  field_opts(share);
  seed_opt(share);

  std::string shares_path;
  auto* party_eval = app.add_subcommand("party-eval", "evaluate one party's shares on a public input");
  party_eval->add_option("--shares", shares_path, "party share file")->required();
  party_eval->add_option("--input", input, "comma-separated input vector");
  party_eval->add_option("--data", c.data, "dataset to take --row from");
  party_eval->add_option("--row", row, "dataset row");
  party_eval->add_option("--out", c.out, "output-share file")->required();

  std::vector<std::string> output_files;
  auto* reconstruct = app.add_subcommand("reconstruct", "combine output shares");
  reconstruct->add_option("files", output_files, "output-share files")->required();
  reconstruct->add_option("--out", c.out, "result JSON (default stdout)");

  auto* cost = app.add_subcommand("cost", "operation counts and time per inference");
  cost->add_option("--model", c.model, "model file")->required();
  cost->add_option("--data", c.data, "calibration dataset");
  cost->add_option("--degrees", degrees_text, "comma-separated degrees");
  cost->add_option("--out", c.out, "CSV path (default stdout)");
  compile_opts(cost);
  seed_opt(cost);

  auto* hide = app.add_subcommand("hide", "insert pseudo-units into a model");
  hide->add_option("--model", c.model, "model file")->required();
  hide->add_option("--pseudo-units", settings.pseudo_units, "pseudo-unit count")->required();
  hide->add_option("--out", c.out, "model path")->required();
  seed_opt(hide);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorCode::kValidation);
  }

  try {
    settings.pool_mode = ParsePoolFlag(pool_mode);
    settings.softmax_mode = ParseSoftmaxMode(softmax_mode);
    settings.seed = c.seed.value_or(1);
    std::optional<Dataset> data;
    if (!c.data.empty() && (compile->parsed() || sweep->parsed() || cost->parsed())) {
      data = LoadData(c.data);
    }

    if (compile->parsed()) {
      const ProgramArtifact artifact =
          CompileModel(LoadModel(c.model), data ? &*data : nullptr, settings);
      SaveArtifact(artifact, c.out);
      const std::string report = report_path.empty() ? c.out + ".report.csv" : report_path;
      std::ofstream rep(report);
      if (!rep) throw IoError("cannot write " + report);
      WriteCompileReport(rep, artifact);
      std::cout << "nodes " << artifact.program.nodes.size() << ", units "
                << artifact.program.unit_count();
      if (artifact.expanded) std::cout << ", terms " << artifact.expanded->term_count;
      std::cout << '\n';
      return 0;
    }

    if (eval->parsed()) {
      const auto x = SelectInput(input, c.data, row);
      json doc;
      if (!c.model.empty()) {
        const auto inf = ReferenceInfer(LoadModel(c.model), x);
        doc["reference"] = ClassJson(inf.logits, inf.predicted_class);
      }
      if (!c.program.empty()) {
        const auto artifact = LoadArtifact(c.program);
        const auto nested = EvalNested(artifact.program, x);
        doc["nested"] = ClassJson(nested.outputs, nested.predicted_class);
        if (artifact.expanded) {
          const auto logits = EvalExpanded(*artifact.expanded, x);
          doc["expanded"] = ClassJson(logits, Argmax(logits));
          const FixedPointParams params(c.field_bits, c.frac_bits);
          const auto values = ClearFixedPointEval(*artifact.expanded, x, params);
          std::vector<double> decoded;
          json raw = json::array();
          for (const auto& v : values) {
            decoded.push_back(DecodeFixed(v, params));
            raw.push_back(ToDecimal(v.raw));
          }
          doc["fixed_point"] = ClassJson(decoded, Argmax(decoded));
          doc["fixed_point"]["values"] = raw;
        }
      }
      if (doc.is_null()) throw ValidationError("give --model and/or --program");
      Emit(doc, c.out);
      return 0;
    }

    if (sweep->parsed()) {
      if (!degrees_text.empty()) sweep_config.degrees = ParseInts(degrees_text);
      sweep_config.seed = settings.seed;
      const auto report = RunSweep(LoadModel(c.model), *data, sweep_config, settings);
      if (c.out.empty()) {
        WriteSweepCsv(std::cout, report, sweep_config);
      } else {
        std::ofstream out(c.out);
        if (!out) throw IoError("cannot write " + c.out);
        WriteSweepCsv(out, report, sweep_config);
      }
      return 0;
    }

    if (share->parsed()) {
      const auto artifact = LoadArtifact(c.program);
      if (!artifact.expanded) {
        throw ValidationError("program has no expanded form; compile with --expand");
      }
      const FixedPointParams params(c.field_bits, c.frac_bits);
      ShareRng rng(c.seed);
      const auto programs = DealProgram(*artifact.expanded, parties, params, rng);
      fs::create_directories(c.out);
      const auto format = share_format == "text" ? ShareFileFormat::kText
                                                 : ShareFileFormat::kBinary;
      const std::string ext = format == ShareFileFormat::kText ? ".json" : ".bin";
      for (const auto& p : programs) {
        const fs::path path = fs::path(c.out) / ("party-" + std::to_string(p.party_id) + ext);
        SavePartyProgram(p, path, format);
        std::cout << path.string() << '\n';
      }
      return 0;
    }

    if (party_eval->parsed()) {
      const auto program = LoadPartyProgram(shares_path);
      const auto x = SelectInput(input, c.data, row);
      const auto out = EvaluatePublicInput(program, x);
      WriteJsonFile(PartyOutputToJson(out, program.params), c.out);
      return 0;
    }

    if (reconstruct->parsed()) {
      std::vector<PartyOutput> outputs;
      std::optional<FixedPointParams> params;
      for (const auto& f : output_files) {
        FixedPointParams p;
        outputs.push_back(PartyOutputFromJson(ReadJsonFile(f), &p));
        if (params && !(*params == p)) {
          throw FingerprintMismatchError("output shares use different field parameters");
        }
        params = p;
      }
      const auto result = ReconstructOutput(outputs, *params);
      json doc = ClassJson(result.logits, result.predicted_class);
      json raw = json::array();
      for (const auto& v : result.field_values) raw.push_back(ToDecimal(v.raw));
      doc["values"] = raw;
      Emit(doc, c.out);
      return 0;
    }

    if (cost->parsed()) {
      const std::vector<int> degrees =
          degrees_text.empty() ? std::vector<int>{8, 16, 32} : ParseInts(degrees_text);
      const auto profile = ProfileCost(LoadModel(c.model), degrees,
                                       data ? &*data : nullptr, settings);
      if (c.out.empty()) {
        WriteCostCsv(std::cout, profile);
      } else {
        std::ofstream out(c.out);
        if (!out) throw IoError("cannot write " + c.out);
        WriteCostCsv(out, profile);
      }
      return 0;
    }

    if (hide->parsed()) {
      const ModelGraph model = LoadModel(c.model);
      const auto counts = SplitPseudoUnits(model, settings.pseudo_units);
      SaveModel(InsertPseudoUnits(model, counts, settings.seed), c.out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "polydnn: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "polydnn: " << e.what() << '\n';
    return static_cast<int>(ErrorCode::kIo);
  } catch (const std::exception& e) {
    std::cerr << "polydnn: " << e.what() << '\n';
    return static_cast<int>(ErrorCode::kValidation);
  }
  return 0;
}

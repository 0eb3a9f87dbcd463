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
#include <optional>
#include <ostream>

#include "json.hpp"
#include "polydnn/compiler.h"
#include "polydnn/polyalg.h"

namespace polydnn {

nlohmann::json PolyToJson(const SparseMultiPoly& poly);
SparseMultiPoly PolyFromJson(const nlohmann::json& doc);

// A compiled program plus, when expansion was requested, its expanded form.
struct ProgramArtifact {
  PolyProgram program;
  std::optional<ExpandedNetworkPoly> expanded;
};

nlohmann::json ArtifactToJson(const ProgramArtifact& artifact);
ProgramArtifact ArtifactFromJson(const nlohmann::json& doc);
void SaveArtifact(const ProgramArtifact& artifact,
                  const std::filesystem::path& path);
ProgramArtifact LoadArtifact(const std::filesystem::path& path);

// Header: layer,kind,activation,degree,interval,max_err,mean_err,nodes,term_count
// term_count is left empty without an expanded form.
void WriteCompileReport(std::ostream& out, const ProgramArtifact& artifact);

nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace polydnn

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
#include <string>

#include "json.hpp"
#include "polydnn/model.h"

namespace polydnn {

// Model files are JSON; see docs/formats.md for the grammar.
ModelGraph ParseModel(const nlohmann::json& doc);
nlohmann::json ModelToJson(const ModelGraph& model);
ModelGraph LoadModel(const std::filesystem::path& path);
void SaveModel(const ModelGraph& model, const std::filesystem::path& path);

enum class DatasetFormat { kIdx, kCsv };

// For kIdx, path names the images file; the labels file is found by
// substituting "labels-idx1" for "images-idx3" in the file name.
Dataset LoadDataset(const std::filesystem::path& path, DatasetFormat format);
Dataset LoadIdxDataset(const std::filesystem::path& images,
                       const std::filesystem::path& labels);
// Rows are: label, feature_0, feature_1, ... Features are taken verbatim.
Dataset LoadCsvDataset(const std::filesystem::path& path);

// Guesses the format from the extension: ".csv" is csv, anything else idx.
DatasetFormat GuessDatasetFormat(const std::filesystem::path& path);

}  // namespace polydnn

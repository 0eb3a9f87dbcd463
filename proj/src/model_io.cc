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

#include "polydnn/model_io.h"

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

using nlohmann::json;

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

const json& Field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

std::vector<double> RealVector(const json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) throw ParseError(where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> Weights(const json& value, std::size_t rows,
                                         std::size_t cols,
                                         const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array");
  std::vector<std::vector<double>> out;
  if (!value.empty() && value.front().is_array()) {
    for (std::size_t r = 0; r < value.size(); ++r) {
      out.push_back(RealVector(value[r], where + "[" + std::to_string(r) + "]"));
    }
    return out;
  }
  // Flat row-major form.
  const auto flat = RealVector(value, where);
  if (flat.size() != rows * cols) {
    throw ValidationError(where + ": flat weights have " +
                          std::to_string(flat.size()) + " entries, expected " +
                          std::to_string(rows * cols));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    out.emplace_back(flat.begin() + r * cols, flat.begin() + (r + 1) * cols);
  }
  return out;
}

Layer ParseLayer(const json& obj, std::size_t index) {
  const std::string where = "layers[" + std::to_string(index) + "]";
  Layer layer;
  layer.kind = ParseLayerKind(Field(obj, "kind", where).get<std::string>());
  const auto& widths = Field(obj, "widths", where);
  if (!widths.is_array() || widths.size() != 2) {
    throw ParseError(where + ".widths: expected [input_width, width]");
  }
  layer.input_width = widths[0].get<std::size_t>();
  layer.width = widths[1].get<std::size_t>();
  if (obj.contains("activation")) {
    layer.activation =
        ParseActivation(obj.at("activation").get<std::string>());
  }
  if (obj.contains("leak_slope") &&
      obj.at("leak_slope").get<double>() != kLeakySlope) {
    throw ValidationError(where + ".leak_slope: only 0.01 is supported");
  }
  if (obj.contains("connectivity")) {
    for (const auto& set : obj.at("connectivity")) {
      layer.connectivity.push_back(set.get<std::vector<std::size_t>>());
    }
  }
  if (layer.IsWeighted()) {
    layer.weights = Weights(Field(obj, "weights", where), layer.width,
                            layer.input_width, where + ".weights");
    layer.bias = RealVector(Field(obj, "bias", where), where + ".bias");
  }
  if (layer.kind == LayerKind::kBatchNorm) {
    const auto& bn = Field(obj, "bn", where);
    const std::string bw = where + ".bn";
    layer.bn = BatchNormParams{
        RealVector(Field(bn, "gamma", bw), bw + ".gamma"),
        RealVector(Field(bn, "beta", bw), bw + ".beta"),
        RealVector(Field(bn, "mean", bw), bw + ".mean"),
        RealVector(Field(bn, "var", bw), bw + ".var")};
  }
  if (obj.contains("pool_mode")) {
    const auto mode = obj.at("pool_mode").get<std::string>();
    if (mode == "mean") {
      layer.pool_mode = PoolMode::kMean;
    } else if (mode == "eq2") {
      layer.pool_mode = PoolMode::kEq2;
    } else {
      throw ParseError(where + ".pool_mode: expected 'mean' or 'eq2'");
    }
  }
  return layer;
}

std::uint32_t ReadBigEndian32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw ParseError("idx: truncated header");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream OpenBinary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

ModelGraph ParseModel(const json& doc) {
  ModelGraph model;
  try {
    model.name = doc.value("name", std::string{});
    model.version = doc.value("version", std::string{});
    model.input_width = Field(doc, "input_width", "model").get<std::size_t>();
    const auto& layers = Field(doc, "layers", "model");
    if (!layers.is_array()) throw ParseError("model.layers: expected array");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      model.layers.push_back(ParseLayer(layers[l], l));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model schema: ") + e.what());
  }
  Validate(model);
  return model;
}

json ModelToJson(const ModelGraph& model) {
  json doc;
  doc["name"] = model.name;
  doc["version"] = model.version;
  doc["input_width"] = model.input_width;
  doc["layers"] = json::array();
  for (const Layer& layer : model.layers) {
    json obj;
    obj["kind"] = LayerKindName(layer.kind);
    obj["widths"] = {layer.input_width, layer.width};
    obj["activation"] = ActivationName(layer.activation);
    if (layer.IsWeighted()) {
      obj["weights"] = layer.weights;
      obj["bias"] = layer.bias;
    }
    if (!layer.connectivity.empty()) obj["connectivity"] = layer.connectivity;
    if (layer.bn) {
      obj["bn"] = {{"gamma", layer.bn->gamma},
                   {"beta", layer.bn->beta},
                   {"mean", layer.bn->mean},
                   {"var", layer.bn->var}};
    }
    if (layer.pool_mode != PoolMode::kUnset) {
      obj["pool_mode"] = layer.pool_mode == PoolMode::kMean ? "mean" : "eq2";
    }
    doc["layers"].push_back(std::move(obj));
  }
  return doc;
}

ModelGraph LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return ParseModel(doc);
}

void SaveModel(const ModelGraph& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << ModelToJson(model).dump(1) << "\n";
}

DatasetFormat GuessDatasetFormat(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::kCsv : DatasetFormat::kIdx;
}

Dataset LoadDataset(const std::filesystem::path& path, DatasetFormat format) {
  if (format == DatasetFormat::kCsv) return LoadCsvDataset(path);
  std::string name = path.filename().string();
  const auto pos = name.find("images-idx3");
  if (pos == std::string::npos) {
    throw IoError("cannot derive labels file from " + path.string() +
                  " (expected 'images-idx3' in the name)");
  }
  name.replace(pos, 11, "labels-idx1");
  return LoadIdxDataset(path, path.parent_path() / name);
}

Dataset LoadIdxDataset(const std::filesystem::path& images,
                       const std::filesystem::path& labels) {
  auto img = OpenBinary(images);
  if (ReadBigEndian32(img) != kIdxImagesMagic) {
    throw ParseError(images.string() + ": bad idx magic for images");
  }
  const std::uint32_t count = ReadBigEndian32(img);
  const std::uint32_t rows = ReadBigEndian32(img);
  const std::uint32_t cols = ReadBigEndian32(img);

  auto lab = OpenBinary(labels);
  if (ReadBigEndian32(lab) != kIdxLabelsMagic) {
    throw ParseError(labels.string() + ": bad idx magic for labels");
  }
  if (ReadBigEndian32(lab) != count) {
    throw ParseError("idx: image and label counts differ");
  }

  Dataset data;
  const std::size_t width = std::size_t{rows} * cols;
  std::vector<unsigned char> buf(width);
  for (std::uint32_t n = 0; n < count; ++n) {
    if (!img.read(reinterpret_cast<char*>(buf.data()),
                  static_cast<std::streamsize>(width))) {
      throw ParseError(images.string() + ": truncated image data");
    }
    std::vector<double> x(width);
    for (std::size_t i = 0; i < width; ++i) x[i] = buf[i] / 255.0;
    data.inputs.push_back(std::move(x));
    char label = 0;
    if (!lab.get(label)) throw ParseError(labels.string() + ": truncated");
    data.labels.push_back(static_cast<unsigned char>(label));
    data.num_classes = std::max<std::size_t>(data.num_classes,
                                             data.labels.back() + 1);
  }
  Validate(data);
  return data;
}

Dataset LoadCsvDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": bad number '" + cell + "'");
      }
    }
    if (values.size() < 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected label and at least one feature");
    }
    if (!data.inputs.empty() && values.size() - 1 != data.input_width()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": ragged row");
    }
    const double label = values.front();
    if (label < 0 || label != static_cast<double>(static_cast<std::size_t>(label))) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": label must be a non-negative integer");
    }
    data.labels.push_back(static_cast<std::size_t>(label));
    data.num_classes = std::max(data.num_classes, data.labels.back() + 1);
    data.inputs.emplace_back(values.begin() + 1, values.end());
  }
  Validate(data);
  return data;
}

}  // namespace polydnn

/*
 * Copyright 2026 The CAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cat/io.h"

#include <fstream>
#include <sstream>

#include "cat/error.h"

namespace cat {

using nlohmann::json;

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix MatrixFromJson(const json& j) {
  if (!j.is_array() || j.empty()) Fail(ErrorKind::kParse, "matrix must be a nonempty array of rows");
  const std::size_t cols = j[0].size();
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (row.size() != cols) Fail(ErrorKind::kParse, "ragged matrix rows");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

json TaylorNetToJson(const TaylorNet& net) {
  json terms = json::array(), in_ranks = json::array(), out_ranks = json::array();
  for (const TuckerTerm& t : net.terms) {
    json factors = json::array();
    std::vector<std::size_t> r_in;
    for (const Matrix& f : t.in_factors) {
      factors.push_back(MatrixToJson(f));
      r_in.push_back(f.cols());
    }
    in_ranks.push_back(r_in);
    out_ranks.push_back(t.out_rank());
    terms.push_back({{"order", t.order},
                     {"core", MatrixToJson(t.core)},
                     {"out_factor", MatrixToJson(t.out_factor)},
                     {"in_factors", factors}});
  }
  return {{"format_version", kFormatVersion},
          {"input_dim", net.input_dim},
          {"output_dim", net.output_dim},
          {"order", net.order()},
          {"ranks", {{"in", in_ranks}, {"out", out_ranks}}},
          {"expansion_point", net.expansion_point},
          {"bias", net.bias},
          {"terms", terms}};
}

TaylorNet TaylorNetFromJson(const json& j) {
  TaylorNet net;
  try {
    if (j.at("format_version").get<int>() != kFormatVersion)
      Fail(ErrorKind::kSchemaMismatch, "unsupported TaylorNet format_version");
    net.input_dim = j.at("input_dim").get<std::size_t>();
    net.output_dim = j.at("output_dim").get<std::size_t>();
    net.expansion_point = j.at("expansion_point").get<std::vector<double>>();
    net.bias = j.at("bias").get<std::vector<double>>();
    for (const json& t : j.at("terms")) {
      TuckerTerm term;
      term.order = t.at("order").get<int>();
      term.core = MatrixFromJson(t.at("core"));
      term.out_factor = MatrixFromJson(t.at("out_factor"));
      for (const json& f : t.at("in_factors")) term.in_factors.push_back(MatrixFromJson(f));
      net.terms.push_back(std::move(term));
    }
    if (j.at("order").get<int>() != net.order())
      Fail(ErrorKind::kParse, "TaylorNet order does not match its terms");
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("TaylorNet: ") + e.what());
  }
  ValidateTaylorNet(net);
  return net;
}

json CatModelToJson(const CatModel& model) {
  json concepts = json::array();
  for (const Concept& c : model.bank.concepts) {
    json layers = json::array();
    for (std::size_t l = 0; l < c.encoder.num_layers(); ++l)
      layers.push_back({{"weight", MatrixToJson(c.encoder.weights[l])},
                        {"bias", c.encoder.biases[l]}});
    concepts.push_back({{"name", c.name},
                        {"columns", c.columns},
                        {"negative_slope", c.encoder.negative_slope},
                        {"dropout", c.encoder.dropout},
                        {"layers", layers}});
  }
  return {{"task", std::string(TaskName(model.task))},
          {"encoders",
           {{"bypass", model.bank.bypass},
            {"bypass_width", model.bank.bypass_width},
            {"concepts", concepts}}},
          {"taylornet", TaylorNetToJson(model.net)}};
}

CatModel CatModelFromJson(const json& j) {
  CatModel model;
  try {
    model.task = ParseTask(j.at("task").get<std::string>());
    const json& enc = j.at("encoders");
    model.bank.bypass = enc.at("bypass").get<bool>();
    model.bank.bypass_width = enc.at("bypass_width").get<std::size_t>();
    for (const json& c : enc.at("concepts")) {
      Concept con;
      con.name = c.at("name").get<std::string>();
      con.columns = c.at("columns").get<std::vector<std::size_t>>();
      con.encoder.negative_slope = c.at("negative_slope").get<double>();
      con.encoder.dropout = c.at("dropout").get<double>();
      std::size_t in = con.columns.size();
      for (const json& layer : c.at("layers")) {
        Matrix w = MatrixFromJson(layer.at("weight"));
        auto b = layer.at("bias").get<std::vector<double>>();
        if (w.cols() != in || b.size() != w.rows())
          Fail(ErrorKind::kShape, "encoder '" + con.name + "' has inconsistent layer shapes");
        in = w.rows();
        con.encoder.weights.push_back(std::move(w));
        con.encoder.biases.push_back(std::move(b));
      }
      if (in != 1) Fail(ErrorKind::kShape, "encoder '" + con.name + "' must end in one output");
      model.bank.concepts.push_back(std::move(con));
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("model: ") + e.what());
  }
  ValidateConceptBank(model.bank);
  model.net = TaylorNetFromJson(j.at("taylornet"));
  if (model.net.input_dim != model.bank.output_dim())
    Fail(ErrorKind::kShape, "TaylorNet input width does not match the concept count");
  return model;
}

json ArchiveToJson(const ModelArchive& a) {
  json history = json::array();
  for (const EpochRecord& e : a.history)
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_metric", e.val_metric},
                       {"lr", e.lr}});
  return {{"format_version", kFormatVersion},
          {"kind", "cat-model-archive"},
          {"preprocessing", a.preprocessing},
          {"config", a.config},
          {"split", {{"seed", a.split_seed}, {"ratios", a.split_ratios}}},
          {"model", CatModelToJson(a.model)},
          {"training",
           {{"best_epoch", a.best_epoch},
            {"best_val_metric", a.best_val_metric},
            {"epochs", a.history.size()},
            {"history", history}}}};
}

ModelArchive ArchiveFromJson(const json& j) {
  if (!j.is_object() || !j.contains("format_version") ||
      j["format_version"] != json(kFormatVersion) || j.value("kind", "") != "cat-model-archive")
    Fail(ErrorKind::kSchemaMismatch, "not a version " + std::to_string(kFormatVersion) +
                                         " model archive");
  ModelArchive a;
  try {
    a.preprocessing = j.at("preprocessing").get<Preprocessor>();
    a.config = j.at("config").get<TrainConfig>();
    a.split_seed = j.at("split").at("seed").get<std::uint64_t>();
    a.split_ratios = j.at("split").at("ratios").get<std::array<double, 3>>();
    a.model = CatModelFromJson(j.at("model"));
    const json& t = j.at("training");
    a.best_epoch = t.at("best_epoch").get<int>();
    a.best_val_metric = t.at("best_val_metric").get<double>();
    for (const json& e : t.at("history")) {
      a.history.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                           e.at("val_metric").get<double>(), e.at("lr").get<double>()});
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("archive: ") + e.what());
  }
  if (a.model.bank.output_dim() != (a.model.bank.bypass ? a.preprocessing.width()
                                                        : a.preprocessing.spec.concepts.size()))
    Fail(ErrorKind::kSchemaMismatch, "model does not match its preprocessing state");
  return a;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) Fail(ErrorKind::kIo, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot rename into '" + path.string() + "': " + ec.message());
}

json ReadJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kParse, path.filename().string() + ": " + e.what());
  }
}

std::string DumpJson(const json& j) { return j.dump(2) + "\n"; }

}  // namespace cat

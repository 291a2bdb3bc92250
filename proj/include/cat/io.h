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

// JSON forms of trained models and the self-contained model archive.

#ifndef CAT_IO_H_
#define CAT_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "cat/data.h"
#include "cat/model.h"
#include "cat/taylornet.h"
#include "cat/training.h"
#include "json.hpp"

namespace cat {

inline constexpr int kFormatVersion = 1;

nlohmann::json MatrixToJson(const Matrix& m);
Matrix MatrixFromJson(const nlohmann::json& j);

// {format_version, input_dim, output_dim, order, ranks, expansion_point,
//  bias, terms: [{order, core, out_factor, in_factors}]}.
nlohmann::json TaylorNetToJson(const TaylorNet& net);
TaylorNet TaylorNetFromJson(const nlohmann::json& j);

nlohmann::json CatModelToJson(const CatModel& model);
CatModel CatModelFromJson(const nlohmann::json& j);

// Everything needed to apply a trained model to a new CSV.
struct ModelArchive {
  Preprocessor preprocessing;  // carries the concept spec
  TrainConfig config;
  std::uint64_t split_seed = 0;
  std::array<double, 3> split_ratios = kDefaultRatios;
  CatModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_metric = 0.0;
};

nlohmann::json ArchiveToJson(const ModelArchive& archive);
// A missing or different format_version is kSchemaMismatch.
ModelArchive ArchiveFromJson(const nlohmann::json& j);

std::string ReadTextFile(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

// Stable text form: two-space indent and a trailing newline.
std::string DumpJson(const nlohmann::json& j);

}  // namespace cat

#endif  // CAT_IO_H_

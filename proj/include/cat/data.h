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

// Tabular input: concept specs, CSV loading, preprocessing and splits.

#ifndef CAT_DATA_H_
#define CAT_DATA_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cat/model.h"
#include "cat/tensor.h"
#include "json.hpp"

namespace cat {

struct ConceptGroup {
  std::string name;
  std::vector<std::string> features;
};

struct ConceptSpec {
  Task task = Task::kRegression;
  std::string target;
  std::vector<ConceptGroup> concepts;
};

// Errors are kSpecInvalid and point at the offending element, e.g.
// "concepts[1].features[0]".
ConceptSpec ConceptSpecFromJson(const nlohmann::json& doc);
ConceptSpec ParseConceptSpec(std::string_view text);
nlohmann::json ConceptSpecToJson(const ConceptSpec& spec);

// Rows of an RFC-4180 file. Fields keep their unquoted text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws kParse with a line number on ragged rows or an unterminated quote,
// and on an empty input.
CsvTable ParseCsv(std::string_view text);
CsvTable ReadCsvFile(const std::filesystem::path& path);

bool IsMissingCell(std::string_view cell);

// The columns a spec refers to, typed but not yet transformed.
struct RawColumn {
  std::string name;
  bool categorical = false;
  std::vector<double> numbers;       // NaN where missing; numeric columns only
  std::vector<std::string> strings;  // categorical columns only; "" where missing
};

struct RawDataset {
  ConceptSpec spec;
  std::vector<RawColumn> columns;  // spec order: group by group
  std::vector<std::size_t> column_group;
  std::vector<std::string> target;  // raw target cells
  std::size_t rows() const { return target.size(); }
};

// A column named by the concept spec but absent from the header is kSchemaMismatch.
RawDataset LoadDataset(const CsvTable& table, const ConceptSpec& spec);

enum class ColumnKind { kNumeric, kCategorical };

struct ColumnTransform {
  std::string name;
  std::size_t group = 0;
  ColumnKind kind = ColumnKind::kNumeric;
  double mean = 0.0;
  double stddev = 1.0;
  std::vector<std::string> categories;  // sorted
  bool dropped = false;
  std::string drop_reason;
  std::size_t missing_in_train = 0;
};

// Everything learned from the training rows.
struct Preprocessor {
  ConceptSpec spec;
  std::vector<ColumnTransform> columns;
  std::vector<std::string> encoded_names;  // e.g. "age", "race=Caucasian"
  std::vector<std::size_t> encoded_group;
  std::vector<std::string> classes;  // classification label order
  double target_mean = 0.0;
  double target_std = 0.0;  // population std of raw train targets (regression)

  std::size_t width() const { return encoded_names.size(); }
  // Feature columns per concept, in concept order.
  std::vector<std::vector<std::size_t>> GroupColumns() const;
  ModelLayout Layout() const;
};

Preprocessor FitPreprocessor(const RawDataset& data, std::span<const std::size_t> train_rows);

struct EncodedData {
  Matrix x;
  std::vector<double> y;
  std::size_t unseen_categories = 0;  // cells encoded as all zeros
  std::size_t imputed = 0;            // missing numerics replaced by the mean
};

// Encodes `rows` of `data` (all rows when empty). Unknown class labels are
// kSchemaMismatch.
EncodedData ApplyPreprocessor(const Preprocessor& pre, const RawDataset& data,
                              std::span<const std::size_t> rows = {});

// Dropped columns, imputation counts and category maps.
nlohmann::json PreprocessingReport(const Preprocessor& pre);

void to_json(nlohmann::json& j, const Preprocessor& p);
void from_json(const nlohmann::json& j, Preprocessor& p);

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

// Shuffles 0..n-1 with `seed`; val and test sizes round to nearest and train
// takes the rest. Each returned set is sorted.
SplitIndices Split(std::size_t n, std::array<double, 3> ratios, std::uint64_t seed);

inline constexpr std::array<double, 3> kDefaultRatios{0.8, 0.1, 0.1};

}  // namespace cat

#endif  // CAT_DATA_H_

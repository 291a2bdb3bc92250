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

#include "cat/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cat/error.h"

namespace cat {

namespace {

using nlohmann::json;

[[noreturn]] void SpecFail(const std::string& where, const std::string& what) {
  Fail(ErrorKind::kSpecInvalid, where.empty() ? what : where + ": " + what);
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

bool ParseDouble(std::string_view text, double& out) {
  const std::string t = Trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

ConceptSpec ConceptSpecFromJson(const json& doc) {
  if (!doc.is_object()) SpecFail("", "concept spec must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "task" && key != "target" && key != "concepts")
      SpecFail(key, "unknown key");
  }
  ConceptSpec spec;
  if (!doc.contains("task") || !doc["task"].is_string()) SpecFail("task", "missing or not a string");
  const std::string task = doc["task"].get<std::string>();
  if (task == "regression") {
    spec.task = Task::kRegression;
  } else if (task == "classification") {
    spec.task = Task::kClassification;
  } else {
    SpecFail("task", "unknown task '" + task + "' (expected regression or classification)");
  }
  if (!doc.contains("target") || !doc["target"].is_string() ||
      doc["target"].get<std::string>().empty())
    SpecFail("target", "missing or not a nonempty string");
  spec.target = doc["target"].get<std::string>();
  if (!doc.contains("concepts") || !doc["concepts"].is_array() || doc["concepts"].empty())
    SpecFail("concepts", "must be a nonempty array");

  std::set<std::string> names, features;
  const json& concepts = doc["concepts"];
  for (std::size_t m = 0; m < concepts.size(); ++m) {
    const std::string where = "concepts[" + std::to_string(m) + "]";
    const json& c = concepts[m];
    if (!c.is_object()) SpecFail(where, "must be an object");
    for (const auto& [key, _] : c.items()) {
      if (key != "name" && key != "features") SpecFail(where + "." + key, "unknown key");
    }
    if (!c.contains("name") || !c["name"].is_string() || c["name"].get<std::string>().empty())
      SpecFail(where + ".name", "missing or not a nonempty string");
    ConceptGroup g;
    g.name = c["name"].get<std::string>();
    if (!names.insert(g.name).second) SpecFail(where + ".name", "duplicate concept '" + g.name + "'");
    if (!c.contains("features") || !c["features"].is_array())
      SpecFail(where + ".features", "must be an array");
    if (c["features"].empty()) SpecFail(where + ".features", "concept '" + g.name + "' is empty");
    for (std::size_t f = 0; f < c["features"].size(); ++f) {
      const std::string fw = where + ".features[" + std::to_string(f) + "]";
      const json& feat = c["features"][f];
      if (!feat.is_string() || feat.get<std::string>().empty())
        SpecFail(fw, "must be a nonempty string");
      const std::string name = feat.get<std::string>();
      if (!features.insert(name).second) SpecFail(fw, "feature '" + name + "' is listed twice");
      if (name == spec.target) SpecFail(fw, "target '" + name + "' cannot be a feature");
      g.features.push_back(name);
    }
    spec.concepts.push_back(std::move(g));
  }
  return spec;
}

ConceptSpec ParseConceptSpec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    SpecFail("", std::string("malformed JSON: ") + e.what());
  }
  return ConceptSpecFromJson(doc);
}

json ConceptSpecToJson(const ConceptSpec& spec) {
  json concepts = json::array();
  for (const ConceptGroup& g : spec.concepts)
    concepts.push_back({{"name", g.name}, {"features", g.features}});
  return {{"task", std::string(TaskName(spec.task))},
          {"target", spec.target},
          {"concepts", concepts}};
}

CsvTable ParseCsv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false;
  std::size_t line = 1, record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A line with nothing on it is not a record.
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
      record_lines.push_back(record_line);
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty())
          Fail(ErrorKind::kParse, "line " + std::to_string(line) + ": stray quote inside a field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes)
    Fail(ErrorKind::kParse, "line " + std::to_string(record_line) + ": unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  if (records.empty()) Fail(ErrorKind::kParse, "empty CSV: no header row");
  CsvTable table;
  table.header = std::move(records[0]);
  for (std::string& h : table.header) h = Trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      Fail(ErrorKind::kParse, "line " + std::to_string(record_lines[r]) + " (row " +
                                  std::to_string(r) + "): expected " +
                                  std::to_string(table.header.size()) + " fields, found " +
                                  std::to_string(records[r].size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable ReadCsvFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return ParseCsv(ss.str());
  } catch (const Error& e) {
    Fail(e.kind(), path.filename().string() + ": " + e.what());
  }
}

bool IsMissingCell(std::string_view cell) {
  const std::string t = Trim(cell);
  return t.empty() || t == "NA" || t == "N/A" || t == "?";
}

RawDataset LoadDataset(const CsvTable& table, const ConceptSpec& spec) {
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!index.emplace(table.header[c], c).second)
      Fail(ErrorKind::kParse, "duplicate header column '" + table.header[c] + "'");
  }
  auto column_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end())
      Fail(ErrorKind::kSchemaMismatch, "column '" + name + "' is not in the CSV header");
    return it->second;
  };
  if (table.rows.empty()) Fail(ErrorKind::kParse, "CSV has a header but no data rows");

  RawDataset data;
  data.spec = spec;
  for (std::size_t m = 0; m < spec.concepts.size(); ++m) {
    for (const std::string& name : spec.concepts[m].features) {
      const std::size_t c = column_of(name);
      RawColumn col;
      col.name = name;
      col.numbers.resize(table.rows.size());
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& cell = table.rows[r][c];
        if (IsMissingCell(cell)) {
          col.numbers[r] = std::numeric_limits<double>::quiet_NaN();
        } else if (!ParseDouble(cell, col.numbers[r])) {
          col.categorical = true;
          break;
        }
      }
      if (col.categorical) {
        col.numbers.clear();
        for (const auto& row : table.rows)
          col.strings.push_back(IsMissingCell(row[c]) ? std::string() : Trim(row[c]));
      }
      data.columns.push_back(std::move(col));
      data.column_group.push_back(m);
    }
  }
  const std::size_t t = column_of(spec.target);
  for (const auto& row : table.rows) data.target.push_back(Trim(row[t]));
  return data;
}

std::vector<std::vector<std::size_t>> Preprocessor::GroupColumns() const {
  std::vector<std::vector<std::size_t>> out(spec.concepts.size());
  for (std::size_t c = 0; c < encoded_group.size(); ++c) out[encoded_group[c]].push_back(c);
  return out;
}

ModelLayout Preprocessor::Layout() const {
  ModelLayout layout;
  layout.task = spec.task;
  layout.num_outputs = spec.task == Task::kRegression ? 1 : classes.size();
  layout.num_features = width();
  for (const ConceptGroup& g : spec.concepts) layout.concept_names.push_back(g.name);
  layout.concept_columns = GroupColumns();
  return layout;
}

namespace {

std::vector<std::size_t> AllRows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

double TargetValue(const std::string& cell, std::size_t row) {
  double v;
  if (!ParseDouble(cell, v))
    Fail(ErrorKind::kParse, "row " + std::to_string(row + 1) + ": target '" + cell +
                                "' is not a finite number");
  return v;
}

void RebuildEncodedNames(Preprocessor& p) {
  p.encoded_names.clear();
  p.encoded_group.clear();
  for (const ColumnTransform& c : p.columns) {
    if (c.dropped) continue;
    if (c.kind == ColumnKind::kNumeric) {
      p.encoded_names.push_back(c.name);
      p.encoded_group.push_back(c.group);
    } else {
      for (const std::string& cat : c.categories) {
        p.encoded_names.push_back(c.name + "=" + cat);
        p.encoded_group.push_back(c.group);
      }
    }
  }
}

}  // namespace

Preprocessor FitPreprocessor(const RawDataset& data, std::span<const std::size_t> train_rows) {
  if (train_rows.empty()) Fail(ErrorKind::kInvalidArgument, "no training rows to fit on");
  Preprocessor p;
  p.spec = data.spec;
  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    const RawColumn& raw = data.columns[c];
    ColumnTransform t;
    t.name = raw.name;
    t.group = data.column_group[c];
    if (raw.categorical) {
      t.kind = ColumnKind::kCategorical;
      std::set<std::string> cats;
      for (std::size_t r : train_rows) {
        if (raw.strings[r].empty()) {
          ++t.missing_in_train;
        } else {
          cats.insert(raw.strings[r]);
        }
      }
      t.categories.assign(cats.begin(), cats.end());
      if (t.categories.size() < 2) {
        t.dropped = true;
        t.drop_reason = "constant in training rows";
      }
    } else {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t r : train_rows) {
        const double v = raw.numbers[r];
        if (std::isnan(v)) {
          ++t.missing_in_train;
        } else {
          sum += v;
          ++n;
        }
      }
      if (n == 0) {
        t.dropped = true;
        t.drop_reason = "no values in training rows";
      } else {
        t.mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r : train_rows) {
          const double v = raw.numbers[r];
          if (!std::isnan(v)) ss += (v - t.mean) * (v - t.mean);
        }
        t.stddev = std::sqrt(ss / static_cast<double>(n));
        if (!(t.stddev > 0.0)) {
          t.dropped = true;
          t.drop_reason = "constant in training rows";
          t.stddev = 0.0;
        }
      }
    }
    p.columns.push_back(std::move(t));
  }
  RebuildEncodedNames(p);
  for (std::size_t m = 0; m < p.spec.concepts.size(); ++m) {
    if (std::find(p.encoded_group.begin(), p.encoded_group.end(), m) == p.encoded_group.end())
      Fail(ErrorKind::kSpecInvalid,
           "concept '" + p.spec.concepts[m].name + "' has no usable columns after preprocessing");
  }

  if (p.spec.task == Task::kClassification) {
    std::set<std::string> labels;
    bool numeric = true;
    for (std::size_t r : train_rows) {
      const std::string& cell = data.target[r];
      if (IsMissingCell(cell))
        Fail(ErrorKind::kParse, "row " + std::to_string(r + 1) + ": missing target");
      labels.insert(cell);
      double v;
      numeric = numeric && ParseDouble(cell, v);
    }
    p.classes.assign(labels.begin(), labels.end());
    if (numeric) {
      std::sort(p.classes.begin(), p.classes.end(), [](const std::string& a, const std::string& b) {
        double x, y;
        ParseDouble(a, x);
        ParseDouble(b, y);
        return x < y;
      });
    }
    if (p.classes.size() < 2)
      Fail(ErrorKind::kInvalidArgument, "classification needs at least two classes in training rows");
  } else {
    double sum = 0.0;
    for (std::size_t r : train_rows) sum += TargetValue(data.target[r], r);
    p.target_mean = sum / static_cast<double>(train_rows.size());
    double ss = 0.0;
    for (std::size_t r : train_rows) {
      const double d = TargetValue(data.target[r], r) - p.target_mean;
      ss += d * d;
    }
    p.target_std = std::sqrt(ss / static_cast<double>(train_rows.size()));
  }
  return p;
}

EncodedData ApplyPreprocessor(const Preprocessor& pre, const RawDataset& data,
                              std::span<const std::size_t> rows_in) {
  std::vector<std::size_t> all;
  if (rows_in.empty()) {
    all = AllRows(data.rows());
    rows_in = all;
  }
  if (data.columns.size() != pre.columns.size())
    Fail(ErrorKind::kSchemaMismatch, "dataset columns do not match the fitted preprocessing");
  EncodedData out;
  out.x = Matrix(rows_in.size(), pre.width());
  std::size_t col = 0;
  for (std::size_t c = 0; c < pre.columns.size(); ++c) {
    const ColumnTransform& t = pre.columns[c];
    const RawColumn& raw = data.columns[c];
    if (raw.name != t.name)
      Fail(ErrorKind::kSchemaMismatch, "expected column '" + t.name + "', found '" + raw.name + "'");
    if (t.dropped) continue;
    if (t.kind == ColumnKind::kNumeric) {
      if (raw.categorical)
        Fail(ErrorKind::kSchemaMismatch, "column '" + t.name + "' was numeric when fitted");
      for (std::size_t i = 0; i < rows_in.size(); ++i) {
        double v = raw.numbers[rows_in[i]];
        if (std::isnan(v)) {
          v = t.mean;
          ++out.imputed;
        }
        out.x(i, col) = (v - t.mean) / t.stddev;
      }
      ++col;
    } else {
      for (std::size_t i = 0; i < rows_in.size(); ++i) {
        // A numeric-looking column fitted as categorical elsewhere is read
        // back through its text form.
        std::string cell;
        if (raw.categorical) {
          cell = raw.strings[rows_in[i]];
        } else if (!std::isnan(raw.numbers[rows_in[i]])) {
          std::ostringstream ss;
          ss << raw.numbers[rows_in[i]];
          cell = ss.str();
        }
        const auto it = std::lower_bound(t.categories.begin(), t.categories.end(), cell);
        if (it != t.categories.end() && *it == cell) {
          out.x(i, col + static_cast<std::size_t>(it - t.categories.begin())) = 1.0;
        } else {
          ++out.unseen_categories;
        }
      }
      col += t.categories.size();
    }
  }

  out.y.resize(rows_in.size());
  for (std::size_t i = 0; i < rows_in.size(); ++i) {
    const std::size_t r = rows_in[i];
    const std::string& cell = data.target[r];
    if (pre.spec.task == Task::kRegression) {
      out.y[i] = TargetValue(cell, r);
    } else {
      const auto it = std::find(pre.classes.begin(), pre.classes.end(), cell);
      if (it == pre.classes.end())
        Fail(ErrorKind::kSchemaMismatch,
             "row " + std::to_string(r + 1) + ": class '" + cell + "' was not seen in training");
      out.y[i] = static_cast<double>(it - pre.classes.begin());
    }
  }
  return out;
}

json PreprocessingReport(const Preprocessor& pre) {
  json dropped = json::array(), imputation = json::object(), categories = json::object(),
       standardization = json::object();
  for (const ColumnTransform& t : pre.columns) {
    if (t.dropped) dropped.push_back({{"column", t.name}, {"reason", t.drop_reason}});
    if (t.kind == ColumnKind::kNumeric) {
      imputation[t.name] = t.missing_in_train;
      if (!t.dropped) standardization[t.name] = {{"mean", t.mean}, {"std", t.stddev}};
    } else {
      categories[t.name] = t.categories;
    }
  }
  json groups = json::object();
  const auto cols = pre.GroupColumns();
  for (std::size_t m = 0; m < cols.size(); ++m) {
    json names = json::array();
    for (std::size_t c : cols[m]) names.push_back(pre.encoded_names[c]);
    groups[pre.spec.concepts[m].name] = names;
  }
  json report = {{"format_version", 1},
                 {"dropped_columns", dropped},
                 {"imputation_counts", imputation},
                 {"category_maps", categories},
                 {"standardization", standardization},
                 {"encoded_columns", groups}};
  if (pre.spec.task == Task::kClassification) report["classes"] = pre.classes;
  return report;
}

void to_json(json& j, const Preprocessor& p) {
  json cols = json::array();
  for (const ColumnTransform& t : p.columns) {
    json c = {{"name", t.name},
              {"group", t.group},
              {"kind", t.kind == ColumnKind::kNumeric ? "numeric" : "categorical"},
              {"dropped", t.dropped}};
    if (t.dropped) c["drop_reason"] = t.drop_reason;
    if (t.kind == ColumnKind::kNumeric) {
      c["mean"] = t.mean;
      c["std"] = t.stddev;
    } else {
      c["categories"] = t.categories;
    }
    c["missing_in_train"] = t.missing_in_train;
    cols.push_back(std::move(c));
  }
  j = {{"spec", ConceptSpecToJson(p.spec)},
       {"columns", cols},
       {"classes", p.classes},
       {"target_mean", p.target_mean},
       {"target_std", p.target_std}};
}

void from_json(const json& j, Preprocessor& p) {
  try {
    p.spec = ConceptSpecFromJson(j.at("spec"));
    p.columns.clear();
    for (const json& c : j.at("columns")) {
      ColumnTransform t;
      t.name = c.at("name").get<std::string>();
      t.group = c.at("group").get<std::size_t>();
      const std::string kind = c.at("kind").get<std::string>();
      if (kind != "numeric" && kind != "categorical")
        Fail(ErrorKind::kParse, "unknown column kind '" + kind + "'");
      t.kind = kind == "numeric" ? ColumnKind::kNumeric : ColumnKind::kCategorical;
      t.dropped = c.at("dropped").get<bool>();
      if (t.dropped) t.drop_reason = c.at("drop_reason").get<std::string>();
      if (t.kind == ColumnKind::kNumeric) {
        t.mean = c.at("mean").get<double>();
        t.stddev = c.at("std").get<double>();
      } else {
        t.categories = c.at("categories").get<std::vector<std::string>>();
      }
      t.missing_in_train = c.at("missing_in_train").get<std::size_t>();
      if (t.group >= p.spec.concepts.size())
        Fail(ErrorKind::kParse, "column '" + t.name + "' refers to a missing concept");
      p.columns.push_back(std::move(t));
    }
    p.classes = j.at("classes").get<std::vector<std::string>>();
    p.target_mean = j.at("target_mean").get<double>();
    p.target_std = j.at("target_std").get<double>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("preprocessing state: ") + e.what());
  }
  RebuildEncodedNames(p);
}

SplitIndices Split(std::size_t n, std::array<double, 3> ratios, std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r >= 0.0)) Fail(ErrorKind::kInvalidArgument, "split ratios must be nonnegative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
    Fail(ErrorKind::kInvalidArgument, "split ratios must sum to 1");
  const auto val_n = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n)));
  const auto test_n = static_cast<std::size_t>(std::llround(ratios[2] * static_cast<double>(n)));
  if (val_n + test_n > n) Fail(ErrorKind::kInvalidArgument, "split sizes exceed the row count");

  std::vector<std::size_t> idx = AllRows(n);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  SplitIndices s;
  const std::size_t train_n = n - val_n - test_n;
  s.train.assign(idx.begin(), idx.begin() + train_n);
  s.val.assign(idx.begin() + train_n, idx.begin() + train_n + val_n);
  s.test.assign(idx.begin() + train_n + val_n, idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace cat

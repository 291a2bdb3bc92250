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

#include "cat/cli.h"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "cat/data.h"
#include "cat/error.h"
#include "cat/interpret.h"
#include "cat/io.h"
#include "cat/metrics.h"
#include "cat/oracle.h"
#include "cat/training.h"

namespace cat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TrainFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> order;
  std::optional<std::size_t> rank;
  std::optional<double> lr;
  std::optional<double> dropout_encoder;
  std::optional<double> dropout_taylor;
  std::optional<int> patience;
  std::optional<std::size_t> batch_size;
  std::optional<int> max_epochs;
  bool bypass = false;
  std::string config_path;
};

void AddTrainFlags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--config", f.config_path, "Training config JSON");
  cmd->add_option("--seed", f.seed, "Seed for initialisation, shuffling and dropout");
  cmd->add_option("--order", f.order, "Polynomial order");
  cmd->add_option("--rank", f.rank, "Tucker rank (0 = default for the order)");
  cmd->add_option("--lr", f.lr, "Learning rate");
  cmd->add_option("--dropout-encoder", f.dropout_encoder, "Dropout inside concept encoders");
  cmd->add_option("--dropout-taylor", f.dropout_taylor, "Dropout on the concept vector");
  cmd->add_option("--patience", f.patience, "Early-stopping patience in epochs");
  cmd->add_option("--batch-size", f.batch_size, "Minibatch size");
  cmd->add_option("--max-epochs", f.max_epochs, "Epoch limit");
  cmd->add_flag("--bypass-encoders", f.bypass, "Feed raw features straight into the TaylorNet");
}

TrainConfig ResolveConfig(const TrainFlags& f, Task task) {
  TrainConfig c;
  if (!f.config_path.empty()) {
    try {
      c = ReadJsonFile(f.config_path).get<TrainConfig>();
    } catch (const json::exception& e) {
      Fail(ErrorKind::kParse, f.config_path + ": " + e.what());
    }
  }
  c.task = task;
  if (f.seed) c.seed = *f.seed;
  if (f.order) c.order = *f.order;
  if (f.rank) c.rank = *f.rank;
  if (f.lr) c.learning_rate = *f.lr;
  if (f.dropout_encoder) c.dropout_encoder = *f.dropout_encoder;
  if (f.dropout_taylor) c.dropout_taylor = *f.dropout_taylor;
  if (f.patience) c.patience = *f.patience;
  if (f.batch_size) c.batch_size = *f.batch_size;
  if (f.max_epochs) c.max_epochs = *f.max_epochs;
  if (f.bypass) c.bypass_encoders = true;
  ValidateTrainConfig(c);
  return c;
}

struct Prepared {
  RawDataset raw;
  SplitIndices split;
  Preprocessor pre;
  DataSplit train, val, test;
};

DataSplit ToSplit(EncodedData e) { return {std::move(e.x), std::move(e.y)}; }

Prepared PrepareData(const std::string& data_path, const std::string& spec_path,
                     std::uint64_t split_seed) {
  const ConceptSpec spec = ParseConceptSpec(ReadTextFile(spec_path));
  Prepared p;
  p.raw = LoadDataset(ReadCsvFile(data_path), spec);
  p.split = Split(p.raw.rows(), kDefaultRatios, split_seed);
  p.pre = FitPreprocessor(p.raw, p.split.train);
  p.train = ToSplit(ApplyPreprocessor(p.pre, p.raw, p.split.train));
  p.val = ToSplit(ApplyPreprocessor(p.pre, p.raw, p.split.val));
  p.test = ToSplit(ApplyPreprocessor(p.pre, p.raw, p.split.test));
  return p;
}

std::string HistoryCsv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_metric,lr\n";
  for (const EpochRecord& e : history)
    out += std::to_string(e.epoch) + "," + FormatNumber(e.train_loss) + "," +
           FormatNumber(e.val_metric) + "," + FormatNumber(e.lr) + "\n";
  return out;
}

std::string_view MetricName(Task task) { return task == Task::kRegression ? "rmse" : "accuracy"; }

// Metrics of `model` on `split`, keyed by name.
json Metrics(const CatModel& model, const DataSplit& split, const Preprocessor& pre) {
  if (split.y.empty()) Fail(ErrorKind::kInvalidArgument, "no rows to evaluate");
  json m;
  if (model.task == Task::kRegression) {
    const Matrix pred = Predict(model, split.x);
    m["rmse"] = Rmse(pred.data(), split.y);
    return m;
  }
  const std::vector<int> pred = PredictClasses(model, split.x);
  std::vector<int> truth(split.y.begin(), split.y.end());
  std::vector<double> per_class;
  m["accuracy"] = Accuracy(pred, truth);
  m["macro_f1"] = MacroF1(pred, truth, static_cast<int>(pre.classes.size()), &per_class);
  json f1 = json::object();
  for (std::size_t c = 0; c < per_class.size(); ++c) f1[pre.classes[c]] = per_class[c];
  m["per_class_f1"] = f1;
  return m;
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create '" + dir + "': " + ec.message());
}

std::vector<std::string> ConceptLabels(const ModelArchive& a) {
  if (a.model.bank.bypass) return a.preprocessing.encoded_names;
  std::vector<std::string> names;
  for (const Concept& c : a.model.bank.concepts) names.push_back(c.name);
  return names;
}

std::vector<std::string> OutputLabels(const ModelArchive& a) {
  if (a.model.task == Task::kClassification) return a.preprocessing.classes;
  return {a.preprocessing.spec.target};
}

int CmdTrain(const std::string& data, const std::string& spec, const TrainFlags& flags,
             std::optional<std::uint64_t> split_seed, const std::string& out_dir,
             std::ostream& out) {
  const ConceptSpec parsed = ParseConceptSpec(ReadTextFile(spec));
  const TrainConfig config = ResolveConfig(flags, parsed.task);
  const std::uint64_t sseed = split_seed.value_or(config.seed);
  Prepared p = PrepareData(data, spec, sseed);
  TrainResult r = TrainFromScratch(p.pre.Layout(), p.train, p.val, config);

  ModelArchive a;
  a.preprocessing = p.pre;
  a.config = config;
  a.split_seed = sseed;
  a.model = std::move(r.model);
  a.history = r.history;
  a.best_epoch = r.best_epoch;
  a.best_val_metric = r.best_val_metric;

  EnsureDir(out_dir);
  WriteFileAtomic(fs::path(out_dir) / "model.json", DumpJson(ArchiveToJson(a)));
  WriteFileAtomic(fs::path(out_dir) / "history.csv", HistoryCsv(a.history));
  WriteFileAtomic(fs::path(out_dir) / "preprocessing.json",
                  DumpJson(PreprocessingReport(a.preprocessing)));

  json summary = {{"task", std::string(TaskName(config.task))},
                  {"epochs", a.history.size()},
                  {"best_epoch", a.best_epoch},
                  {"param_count", CountParams(a.model)},
                  {"val", Metrics(a.model, p.val, p.pre)},
                  {"test", Metrics(a.model, p.test, p.pre)}};
  out << summary.dump() << "\n";
  return 0;
}

int CmdEvaluate(const std::string& archive_path, const std::string& data,
                const std::string& split_name, const std::string& out_dir, std::ostream& out,
                std::ostream& err) {
  const ModelArchive a = ArchiveFromJson(ReadJsonFile(archive_path));
  const RawDataset raw = LoadDataset(ReadCsvFile(data), a.preprocessing.spec);
  std::vector<std::size_t> rows;
  if (split_name != "all") {
    const SplitIndices s = Split(raw.rows(), a.split_ratios, a.split_seed);
    rows = split_name == "train" ? s.train : split_name == "val" ? s.val : s.test;
    if (rows.empty()) Fail(ErrorKind::kInvalidArgument, "split '" + split_name + "' is empty");
  }
  EncodedData enc = ApplyPreprocessor(a.preprocessing, raw, rows);
  if (enc.unseen_categories > 0)
    err << "warning: " << enc.unseen_categories
        << " categorical cells had categories unseen in training and were encoded as zeros\n";
  const std::size_t n = enc.y.size();
  json result = {{"format_version", kFormatVersion},
                 {"task", std::string(TaskName(a.model.task))},
                 {"split", split_name},
                 {"rows", n},
                 {"unseen_categories", enc.unseen_categories},
                 {"imputed", enc.imputed}};
  const json m = Metrics(a.model, ToSplit(std::move(enc)), a.preprocessing);
  result["metrics"] = m;
  out << result.dump(2) << "\n";
  if (!out_dir.empty()) {
    EnsureDir(out_dir);
    std::string csv = "metric,value\n";
    for (const auto& [k, v] : m.items())
      if (v.is_number()) csv += k + "," + FormatNumber(v.get<double>()) + "\n";
    WriteFileAtomic(fs::path(out_dir) / "metrics.json", DumpJson(result));
    WriteFileAtomic(fs::path(out_dir) / "metrics.csv", csv);
  }
  return 0;
}

int CmdExplain(const std::string& archive_path, const std::string& reference, int precision,
               const std::string& out_dir, std::ostream& out) {
  const ModelArchive a = ArchiveFromJson(ReadJsonFile(archive_path));
  const PolynomialExpansion poly = ExpandMonomials(a.model.net);
  const RawDataset raw = LoadDataset(ReadCsvFile(reference), a.preprocessing.spec);
  const EncodedData enc = ApplyPreprocessor(a.preprocessing, raw);
  const Matrix z = EncodeConcepts(a.model, enc.x);
  const std::vector<std::string> names = ConceptLabels(a);
  const std::vector<std::string> labels = OutputLabels(a);

  const ContributionReport report =
      StandardizedContributions(poly, z, a.model.task, enc.y, names, labels);
  const auto shapes = ShapeFunctions(poly, z, names);

  std::string text;
  for (std::size_t m = 0; m < names.size(); ++m)
    text += "z" + std::to_string(m + 1) + " = " + names[m] + "\n";
  text += RenderPolynomial(poly, precision, a.model.task == Task::kClassification
                                                ? labels
                                                : std::vector<std::string>{});
  if (text.back() != '\n') text += "\n";

  EnsureDir(out_dir);
  const fs::path dir(out_dir);
  WriteFileAtomic(dir / "polynomial.txt", text);
  WriteFileAtomic(dir / "contributions.json", DumpJson(ContributionsToJson(report)));
  WriteFileAtomic(dir / "contributions.csv", ContributionsToCsv(report));
  WriteFileAtomic(dir / "contributions.svg", ContributionsSvg(report));
  WriteFileAtomic(dir / "shapes.json", DumpJson(ShapesToJson(shapes, labels)));
  WriteFileAtomic(dir / "shapes.csv", ShapesToCsv(shapes, labels));
  WriteFileAtomic(dir / "shapes.svg", ShapesSvg(shapes));
  out << text;
  return 0;
}

int SweepThreads() {
  int threads = omp_get_max_threads();
  if (const char* env = std::getenv("CAT_THREADS"); env && *env) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1)
      Fail(ErrorKind::kInvalidArgument, std::string("CAT_THREADS must be a positive integer, got '") +
                                            env + "'");
    threads = std::min<long>(threads, cap);
  }
  return std::max(threads, 1);
}

int CmdSweep(const std::string& data, const std::string& spec, const std::string& grid_path,
             const TrainFlags& flags, std::optional<std::uint64_t> split_seed,
             const std::string& out_dir, std::ostream& out) {
  const ConceptSpec parsed = ParseConceptSpec(ReadTextFile(spec));
  const TrainConfig base = ResolveConfig(flags, parsed.task);
  GridSpec grid;
  try {
    grid = ReadJsonFile(grid_path).get<GridSpec>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, grid_path + ": " + e.what());
  }
  const std::uint64_t sseed = split_seed.value_or(base.seed);
  Prepared p = PrepareData(data, spec, sseed);
  const std::vector<TrainConfig> configs = ExpandGrid(base, grid);
  GridResult result = GridSearch(p.pre.Layout(), p.train, p.val, configs, SweepThreads());

  const std::string metric(MetricName(base.task));
  std::string csv = "position,cell,order,rank,lr,dropout_encoder,dropout_taylor,status,val_" +
                    metric + ",test_" + metric + ",param_count,epochs,best_epoch,error\n";
  json cells = json::array();
  std::size_t position = 0;
  for (const GridCell& c : result.leaderboard) {
    ++position;
    json cell = {{"position", position},
                 {"cell", c.index},
                 {"order", c.config.order},
                 {"rank", c.config.EffectiveRank()},
                 {"lr", c.config.learning_rate},
                 {"dropout_encoder", c.config.dropout_encoder},
                 {"dropout_taylor", c.config.dropout_taylor},
                 {"status", c.failed ? "failed" : "ok"}};
    std::string val, test;
    if (!c.failed) {
      const double t = Metrics(c.result->model, p.test, p.pre)[metric].get<double>();
      cell["val_metric"] = c.val_metric;
      cell["test_metric"] = t;
      cell["param_count"] = c.param_count;
      cell["epochs"] = c.epochs;
      cell["best_epoch"] = c.best_epoch;
      val = FormatNumber(c.val_metric);
      test = FormatNumber(t);
    } else {
      cell["error"] = c.error;
    }
    cells.push_back(cell);
    std::string error = c.error;
    std::replace(error.begin(), error.end(), ',', ';');
    csv += std::to_string(position) + "," + std::to_string(c.index) + "," +
           std::to_string(c.config.order) + "," + std::to_string(c.config.EffectiveRank()) + "," +
           FormatNumber(c.config.learning_rate) + "," + FormatNumber(c.config.dropout_encoder) +
           "," + FormatNumber(c.config.dropout_taylor) + "," + (c.failed ? "failed" : "ok") + "," +
           val + "," + test + "," + (c.failed ? "" : std::to_string(c.param_count)) + "," +
           (c.failed ? "" : std::to_string(c.epochs)) + "," +
           (c.failed ? "" : std::to_string(c.best_epoch)) + "," + error + "\n";
  }
  EnsureDir(out_dir);
  WriteFileAtomic(fs::path(out_dir) / "leaderboard.csv", csv);
  WriteFileAtomic(fs::path(out_dir) / "leaderboard.json",
                  DumpJson({{"format_version", kFormatVersion},
                            {"task", std::string(TaskName(base.task))},
                            {"metric", metric},
                            {"cells", cells}}));
  out << csv;
  if (!result.any_succeeded())
    Fail(ErrorKind::kNumerical, "every sweep cell failed; first error: " +
                                    result.leaderboard.front().error);
  return 0;
}

int CmdOracle(const OracleOptions& options, std::ostream& out, std::ostream& err) {
  const auto results = RunOracleSuites(options);
  const std::string report = FormatOracleReport(results);
  out << report;
  for (const OracleSuiteResult& r : results) {
    if (!r.passed) {
      err << ErrorKindName(ErrorKind::kNumerical) << ": invariant '" << r.name
          << "' violated (max relative error " << r.max_error << ")\n";
      return ExitCodeFor(ErrorKind::kNumerical);
    }
  }
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Concept-based additive Taylor models for tabular data", "cat");
  app.require_subcommand(1);

  std::string data, spec, archive, out_dir, grid, reference, split_name = "test";
  std::optional<std::uint64_t> split_seed;
  int precision = 4;
  TrainFlags tflags;
  OracleOptions oracle;

  CLI::App* train = app.add_subcommand("train", "Split, preprocess and train a model");
  train->add_option("data", data, "CSV file")->required();
  train->add_option("spec", spec, "Concept spec JSON")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--split-seed", split_seed, "Seed for the train/val/test split (default: --seed)");
  AddTrainFlags(train, tflags);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score an archive on a CSV file");
  evaluate->add_option("archive", archive, "model.json")->required();
  evaluate->add_option("data", data, "CSV file")->required();
  evaluate->add_option("--split", split_name, "Rows to score")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  evaluate->add_option("--out", out_dir, "Directory for metrics.json and metrics.csv");

  CLI::App* explain = app.add_subcommand("explain", "Polynomial, contributions and shape functions");
  explain->add_option("archive", archive, "model.json")->required();
  explain->add_option("reference", reference, "Reference CSV for scales and densities")->required();
  explain->add_option("--out", out_dir, "Output directory")->required();
  explain->add_option("--precision", precision, "Decimals in polynomial.txt")
      ->check(CLI::Range(0, 17))
      ->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "Grid search over training settings");
  sweep->add_option("data", data, "CSV file")->required();
  sweep->add_option("spec", spec, "Concept spec JSON")->required();
  sweep->add_option("--grid", grid, "Grid JSON")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--split-seed", split_seed, "Seed for the train/val/test split (default: --seed)");
  AddTrainFlags(sweep, tflags);

  CLI::App* check = app.add_subcommand("oracle-check", "Randomized self-checks of the kernels");
  check->add_option("--seed", oracle.seed)->capture_default_str();
  check->add_option("--trials", oracle.trials)->capture_default_str();
  check->add_option("--max-dim", oracle.max_dim)->capture_default_str();
  check->add_option("--max-outputs", oracle.max_outputs)->capture_default_str();
  check->add_option("--max-order", oracle.max_order)->capture_default_str();
  check->add_option("--max-rank", oracle.max_rank)->capture_default_str();
  check->add_flag("--inject-kronecker-fault", oracle.corrupt_kronecker)->group("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << ErrorKindName(ErrorKind::kInvalidArgument) << ": " << e.what() << "\n";
    return ExitCodeFor(ErrorKind::kInvalidArgument);
  }

  try {
    if (train->parsed()) return CmdTrain(data, spec, tflags, split_seed, out_dir, out);
    if (evaluate->parsed()) return CmdEvaluate(archive, data, split_name, out_dir, out, err);
    if (explain->parsed()) return CmdExplain(archive, reference, precision, out_dir, out);
    if (sweep->parsed()) return CmdSweep(data, spec, grid, tflags, split_seed, out_dir, out);
    return CmdOracle(oracle, out, err);
  } catch (const Error& e) {
    err << ErrorKindName(e.kind()) << ": " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const json::exception& e) {
    err << ErrorKindName(ErrorKind::kParse) << ": " << e.what() << "\n";
    return ExitCodeFor(ErrorKind::kParse);
  }
}

}  // namespace cat

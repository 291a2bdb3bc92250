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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "cat/cli.h"
#include "cat/interpret.h"
#include "cat/io.h"
#include "cat/metrics.h"
#include "cat/oracle.h"

namespace cat {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

const fs::path kDataDir = CAT_TEST_DATA_DIR;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Models trained along the way and reused by later criteria.
struct Trained {
  std::string name;
  CatModel model;
  Matrix z;                  // concept values of the reference rows
  std::vector<double> targets;
};
std::vector<Trained> g_trained;
std::vector<OracleSuiteResult> g_oracle;
json g_compas_archive;

const OracleSuiteResult& Suite(const std::string& name) {
  for (const auto& r : g_oracle)
    if (r.name == name) return r;
  throw std::runtime_error("no oracle suite " + name);
}

Outcome OracleEquivalence() {
  const auto start = Clock::now();
  OracleOptions opt;
  opt.seed = 2026;
  opt.trials = 500;
  opt.max_dim = 6;
  opt.max_outputs = 3;
  opt.max_order = 3;
  opt.max_rank = 4;
  g_oracle = RunOracleSuites(opt);
  const double secs = Seconds(start);
  const auto& f = Suite("forward_matches_full_tensor");
  const auto& r = Suite("reference_forward_matches_full_tensor");
  return {f.passed && r.passed && f.cases >= 500 && secs < 60.0,
          std::to_string(f.cases) + " nets, max rel err " + Fmt("%.2e", f.max_error) +
              " (reference " + Fmt("%.2e", r.max_error) + "), " + Fmt("%.1f", secs) + "s"};
}

Outcome GradientChecks() {
  const auto& m = Suite("catmodel_gradients_match_finite_differences");
  const auto& t = Suite("taylornet_gradients_match_finite_differences");
  return {m.passed && t.passed && m.tolerance <= 1e-3 && t.tolerance <= 1e-4,
          "CatModel max rel err " + Fmt("%.2e", m.max_error) + " (< 1e-3), TaylorNet " +
              Fmt("%.2e", t.max_error) + " (< 1e-4)"};
}

Outcome ExpansionFidelity() {
  const auto& e = Suite("expansion_matches_forward");
  const TaylorNet six = MakeTaylorNet(6, 1, RankConfig::Uniform(2, 8));
  const std::size_t terms = ExpandMonomials(six).terms.size();
  return {e.passed && e.cases >= 100 && terms == 28,
          std::to_string(e.cases) + " nets, max rel err " + Fmt("%.2e", e.max_error) +
              "; d=6 N=2 has " + std::to_string(terms) + " terms (" +
              std::to_string(terms - 1) + " non-constant)"};
}

// Generator coefficients over the raw features x1..x3.
const std::map<Exponent, double> kGenerator = {
    {{0, 0, 0}, 0.3},  {{1, 0, 0}, 1.2},  {{0, 1, 0}, -0.7}, {{0, 0, 1}, 0.9},
    {{2, 0, 0}, 0.8},  {{1, 1, 0}, -0.6}, {{1, 0, 1}, 0.5},  {{0, 2, 0}, 0.7},
    {{0, 1, 1}, -0.9}, {{0, 0, 2}, 0.6}};

// Re-expresses the generator in standardized coordinates x = mean + std * z.
std::map<Exponent, double> StandardizedGenerator(const std::vector<double>& mean,
                                                 const std::vector<double>& sd) {
  // Every monomial here has degree <= 2; expand each factor (m + s z).
  std::map<Exponent, double> out;
  for (const auto& [e, c] : kGenerator) {
    std::vector<std::size_t> vars;
    for (std::size_t i = 0; i < 3; ++i)
      for (int k = 0; k < e[i]; ++k) vars.push_back(i);
    const std::size_t n = vars.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Exponent t(3, 0);
      double coef = c;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask >> k & 1) {
          ++t[vars[k]];
          coef *= sd[vars[k]];
        } else {
          coef *= mean[vars[k]];
        }
      }
      out[t] += coef;
    }
  }
  return out;
}

Outcome SyntheticRecovery() {
  const auto start = Clock::now();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::ostringstream csv;
  csv.precision(17);
  csv << "x1,x2,x3,y\n";
  for (int i = 0; i < 5000; ++i) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    double y = noise(rng);
    for (const auto& [e, c] : kGenerator) y += c * MonomialValue(e, x);
    csv << x[0] << "," << x[1] << "," << x[2] << "," << y << "\n";
  }
  const ConceptSpec spec = ParseConceptSpec(R"({"task": "regression", "target": "y",
      "concepts": [{"name": "a", "features": ["x1"]}, {"name": "b", "features": ["x2"]},
                   {"name": "c", "features": ["x3"]}]})");
  const RawDataset raw = LoadDataset(ParseCsv(csv.str()), spec);
  const SplitIndices split = Split(raw.rows(), kDefaultRatios, 0);
  const Preprocessor pre = FitPreprocessor(raw, split.train);
  auto encode = [&](const std::vector<std::size_t>& rows) {
    EncodedData e = ApplyPreprocessor(pre, raw, rows);
    return DataSplit{std::move(e.x), std::move(e.y)};
  };
  const DataSplit train = encode(split.train), val = encode(split.val), test = encode(split.test);
  TrainConfig config;
  config.task = Task::kRegression;
  config.order = 2;
  config.rank = 4;
  config.bypass_encoders = true;
  const TrainResult result = TrainFromScratch(pre.Layout(), train, val, config);
  const Matrix pred = Predict(result.model, test.x);
  const double rmse = Rmse(pred.data(), test.y);

  std::vector<double> mean, sd;
  for (const ColumnTransform& c : pre.columns) {
    mean.push_back(c.mean);
    sd.push_back(c.stddev);
  }
  const std::map<Exponent, double> truth = StandardizedGenerator(mean, sd);
  const PolynomialExpansion poly = ExpandMonomials(result.model.net);
  double worst = 0.0;
  std::string worst_label;
  for (const auto& [e, c] : truth) {
    const double got = poly.terms.at(e)[0];
    const double rel = std::abs(got - c) / std::abs(c);
    if (rel > worst) {
      worst = rel;
      worst_label = MonomialLabel(e);
    }
  }
  g_trained.push_back({"synthetic", result.model, EncodeConcepts(result.model, test.x), test.y});
  const double secs = Seconds(start);
  return {rmse < 0.05 && worst < 0.05 && secs < 120.0,
          "test RMSE " + Fmt("%.4f", rmse) + ", worst coefficient rel err " + Fmt("%.2f%%", 100 * worst) +
              " (" + worst_label + "), " + std::to_string(result.history.size()) + " epochs, " +
              Fmt("%.1f", secs) + "s"};
}

int RunQuiet(const std::vector<std::string>& args, std::string* out) {
  std::ostringstream o, e;
  const int code = RunCli(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

Outcome CompasReproduction() {
  const auto start = Clock::now();
  const fs::path csv = kDataDir / "compas.csv", spec = kDataDir / "compas_spec.json";
  if (!fs::exists(csv)) return {false, "missing " + csv.string()};
  const fs::path tmp = fs::temp_directory_path() / "cat_acceptance_compas";
  const std::map<int, double> reported = {{2, 0.6772}, {3, 0.6793}};
  bool ok = true;
  std::string detail;
  for (const auto& [order, target] : reported) {
    std::vector<double> acc;
    for (int seed = 0; seed < 3; ++seed) {
      const fs::path dir = tmp / ("o" + std::to_string(order) + "s" + std::to_string(seed));
      std::string out;
      if (RunQuiet({"train", csv.string(), spec.string(), "--out", dir.string(), "--order",
                    std::to_string(order), "--seed", std::to_string(seed)},
                   &out) != 0)
        return {false, "training failed for order " + std::to_string(order)};
      acc.push_back(json::parse(out)["test"]["accuracy"].get<double>());
      const json archive = ReadJsonFile(dir / "model.json");
      if (order == 2 && seed == 0) g_compas_archive = archive;
      const ModelArchive a = ArchiveFromJson(archive);
      const RawDataset raw = LoadDataset(ReadCsvFile(csv), a.preprocessing.spec);
      const SplitIndices split = Split(raw.rows(), a.split_ratios, a.split_seed);
      const EncodedData test = ApplyPreprocessor(a.preprocessing, raw, split.test);
      g_trained.push_back({"compas_o" + std::to_string(order) + "_s" + std::to_string(seed),
                           a.model, EncodeConcepts(a.model, test.x), test.y});
    }
    const double mean = (acc[0] + acc[1] + acc[2]) / 3.0;
    ok = ok && std::abs(mean - target) <= 0.03;
    detail += "order " + std::to_string(order) + " mean test acc " + Fmt("%.4f", mean) + " [" +
              Fmt("%.4f", acc[0]) + " " + Fmt("%.4f", acc[1]) + " " + Fmt("%.4f", acc[2]) +
              "] vs " + Fmt("%.4f", target) + "; ";
  }
  fs::remove_all(tmp);
  const double secs = Seconds(start);
  return {ok && secs < 600.0, detail + Fmt("%.0f", secs) + "s"};
}

std::size_t CountNumbers(const json& j) {
  if (j.is_number()) return 1;
  std::size_t n = 0;
  if (j.is_array() || j.is_object())
    for (const json& v : j) n += CountNumbers(v);
  return n;
}

// Learnable arrays of a serialized CatModel.
std::size_t SerializedParams(const json& model) {
  std::size_t n = 0;
  for (const json& c : model["encoders"]["concepts"])
    for (const json& l : c["layers"]) n += CountNumbers(l["weight"]) + CountNumbers(l["bias"]);
  const json& net = model["taylornet"];
  n += CountNumbers(net["bias"]);
  for (const json& t : net["terms"])
    n += CountNumbers(t["core"]) + CountNumbers(t["out_factor"]) + CountNumbers(t["in_factors"]);
  return n;
}

Outcome ParameterCounting() {
  std::mt19937_64 rng(6);
  int mismatches = 0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelLayout layout;
    const std::size_t groups = 1 + rng() % 4;
    layout.task = rng() % 2 ? Task::kClassification : Task::kRegression;
    layout.num_outputs = layout.task == Task::kRegression ? 1 : 2 + rng() % 2;
    layout.bypass = trial % 5 == 4;
    std::size_t col = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      layout.concept_names.push_back("g" + std::to_string(g));
      std::vector<std::size_t> cols;
      for (std::size_t k = 0, n = 1 + rng() % 3; k < n; ++k) cols.push_back(col++);
      layout.concept_columns.push_back(cols);
    }
    layout.num_features = col;
    layout.hidden.clear();
    for (std::size_t l = 0, n = rng() % 3; l < n; ++l) layout.hidden.push_back(1 + rng() % 6);
    RankConfig ranks;
    ranks.allow_wide_output = true;
    for (int k = 1, order = 1 + static_cast<int>(rng() % 3); k <= order; ++k) {
      std::vector<std::size_t> in;
      for (int j = 0; j < k; ++j) in.push_back(1 + rng() % 4);
      ranks.in.push_back(in);
      ranks.out.push_back(1 + rng() % 4);
    }
    const CatModel model = MakeCatModel(layout, ranks, 0.0, rng());
    if (CountParams(model) != SerializedParams(CatModelToJson(model))) ++mismatches;
  }
  const auto& s = Suite("term_and_parameter_counts");
  if (g_compas_archive.is_null()) return {false, "no COMPAS archive to count"};
  const std::size_t compas = SerializedParams(g_compas_archive["model"]);
  const CatModel m = CatModelFromJson(g_compas_archive["model"]);
  const double ratio = static_cast<double>(compas) / 14354.0;
  const bool ok = mismatches == 0 && s.passed && CountParams(m) == compas && ratio >= 1 / 1.1 &&
                  ratio <= 1.1;
  return {ok, "20 random CatModels and " + std::to_string(s.cases - 1) +
                  " TaylorNets match serialized arrays (" + std::to_string(mismatches) +
                  " mismatches); COMPAS order-2 count " + std::to_string(compas) + " = " +
                  Fmt("%.3f", ratio) + " x 14354"};
}

Outcome InterpretationInvariants() {
  if (g_trained.empty()) return {false, "no trained models"};
  double worst = 0.0;
  bool ranking_ok = true;
  for (const Trained& t : g_trained) {
    const TaylorNet& net = t.model.net;
    const PolynomialExpansion poly = ExpandMonomials(net);
    const std::size_t d = net.input_dim;
    const Matrix base = Forward(net, Matrix(1, d));
    std::vector<double> grid;
    for (int g = 0; g <= 40; ++g) grid.push_back(-3.0 + 0.15 * g);
    for (std::size_t m = 0; m < d; ++m) {
      const Matrix s = ShapeFunction(poly, m, grid);
      Matrix probe(grid.size(), d);
      for (std::size_t g = 0; g < grid.size(); ++g) probe(g, m) = grid[g];
      const Matrix f = Forward(net, probe);
      for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t c = 0; c < net.output_dim; ++c) {
          const double want = f(g, c) - base(0, c);
          worst = std::max(worst, std::abs(s(g, c) - want) /
                                      std::max({std::abs(s(g, c)), std::abs(want), 1e-9}));
        }
    }
    std::vector<std::string> names(d);
    for (std::size_t m = 0; m < d; ++m) names[m] = "c" + std::to_string(m);
    const ContributionReport ref =
        StandardizedContributions(poly, t.z, t.model.task, t.targets, names, {});
    for (double scale : {0.01, 3.7}) {
      PolynomialExpansion scaled = poly;
      for (auto& [e, coef] : scaled.terms)
        for (double& v : coef) v *= scale;
      std::vector<double> targets = t.targets;
      for (double& v : targets) v *= scale;
      const ContributionReport r =
          StandardizedContributions(scaled, t.z, t.model.task, targets, names, {});
      ranking_ok = ranking_ok && r.ranking == ref.ranking;
    }
  }
  return {worst < 1e-9 && ranking_ok,
          std::to_string(g_trained.size()) + " trained models; shape max rel err " +
              Fmt("%.2e", worst) + "; ranking " + (ranking_ok ? "unchanged" : "CHANGED") +
              " under rescaling by 0.01 and 3.7"};
}

Outcome Determinism() {
  const fs::path tmp = fs::temp_directory_path() / "cat_acceptance_determinism";
  fs::remove_all(tmp);
  const std::vector<std::string> common = {
      "train", (kDataDir / "compas.csv").string(), (kDataDir / "compas_spec.json").string(),
      "--seed", "5", "--max-epochs", "5", "--dropout-encoder", "0.1", "--dropout-taylor", "0.1",
      "--out"};
  for (const char* run : {"a", "b"}) {
    std::vector<std::string> args = common;
    args.push_back((tmp / run).string());
    if (RunQuiet(args, nullptr) != 0) return {false, "training failed"};
  }
  bool same = true;
  std::size_t bytes = 0;
  for (const char* file : {"model.json", "history.csv", "preprocessing.json"}) {
    const std::string a = ReadTextFile(tmp / "a" / file), b = ReadTextFile(tmp / "b" / file);
    same = same && a == b;
    bytes += a.size();
  }
  fs::remove_all(tmp);
  return {same, std::string(same ? "identical" : "DIFFERENT") + " archive, history and report (" +
                    std::to_string(bytes) + " bytes)"};
}

Outcome MetricFixtures() {
  const std::vector<double> p0{0, 0}, t34{3, 4};
  const double rmse = Rmse(p0, t34);
  const std::vector<int> a1{0, 1, 1}, a2{0, 0, 1};
  const double acc = Accuracy(a1, a2);
  const std::vector<int> fp{0, 0, 1, 1}, ft{0, 1, 0, 1};
  std::vector<double> per_class;
  const double f1 = MacroF1(fp, ft, 2, &per_class);
  const std::vector<int> ones{1, 1, 1, 1}, bal{0, 0, 1, 1};
  const double f1_one = MacroF1(ones, bal, 2, nullptr);
  const std::vector<int> same{2, 0, 1, 1};
  const double perfect = MacroF1(same, same, 3, nullptr);
  const bool ok = rmse == std::sqrt(12.5) && acc == 2.0 / 3.0 && f1 == 0.5 &&
                  per_class == std::vector<double>{0.5, 0.5} && f1_one == 1.0 / 3.0 &&
                  perfect == 1.0 && Rmse(t34, t34) == 0.0;
  return {ok, "rmse " + Fmt("%.4f", rmse) + ", accuracy " + Fmt("%.4f", acc) + ", macro-F1 " +
                  Fmt("%.4f", f1) + " and " + Fmt("%.4f", f1_one)};
}

}  // namespace
}  // namespace cat

int main() {
  using cat::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle_equivalence", cat::OracleEquivalence},
      {"gradient_checks", cat::GradientChecks},
      {"expansion_fidelity", cat::ExpansionFidelity},
      {"synthetic_recovery", cat::SyntheticRecovery},
      {"compas_reproduction", cat::CompasReproduction},
      {"parameter_counting", cat::ParameterCounting},
      {"interpretation_invariants", cat::InterpretationInvariants},
      {"determinism", cat::Determinism},
      {"metric_fixtures", cat::MetricFixtures},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << i + 1 << " "
              << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}

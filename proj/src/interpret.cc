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

#include "cat/interpret.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "cat/error.h"

namespace cat {

namespace {

using nlohmann::json;

double PopulationStd(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> MonomialColumn(const Exponent& e, const Matrix& z) {
  std::vector<double> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) out[i] = MonomialValue(e, z.row(i));
  return out;
}

bool IsConstant(const Exponent& e) {
  return std::all_of(e.begin(), e.end(), [](int p) { return p == 0; });
}

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Fixed two-decimal coordinates keep the SVG bytes stable and small.
std::string Px(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string FormatNumber(double v) {
  if (v == 0.0) return "0.0";  // also folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string MonomialLabel(const Exponent& e) {
  std::string out;
  for (std::size_t m = 0; m < e.size(); ++m) {
    if (e[m] == 0) continue;
    if (!out.empty()) out += "*";
    out += "z" + std::to_string(m + 1);
    if (e[m] > 1) out += "^" + std::to_string(e[m]);
  }
  return out.empty() ? "1" : out;
}

ContributionReport StandardizedContributions(const PolynomialExpansion& poly, const Matrix& z,
                                             Task task, std::span<const double> targets,
                                             std::vector<std::string> concept_names,
                                             std::vector<std::string> output_labels) {
  if (z.rows() == 0) Fail(ErrorKind::kInvalidArgument, "no reference rows");
  if (z.cols() != poly.input_dim) Fail(ErrorKind::kShape, "reference concepts do not match the model");
  const std::size_t o = poly.output_dim;
  ContributionReport report;
  report.concept_names = std::move(concept_names);
  report.output_labels = std::move(output_labels);

  // Coefficients in the space the scale is measured in.
  auto effective = [&](const std::vector<double>& coef) {
    if (task == Task::kRegression) return coef;
    double mean = 0.0;
    for (double c : coef) mean += c;
    mean /= static_cast<double>(o);
    std::vector<double> out(o);
    for (std::size_t c = 0; c < o; ++c) out[c] = coef[c] - mean;
    return out;
  };

  if (task == Task::kRegression) {
    if (targets.size() != z.rows()) Fail(ErrorKind::kShape, "targets and reference rows differ");
    if (o != 1) Fail(ErrorKind::kShape, "regression expects one output");
    const double sy = PopulationStd(targets);
    if (!(sy > 0.0)) Fail(ErrorKind::kInvalidArgument, "reference targets have zero variance");
    report.scale = {sy};
  } else {
    std::vector<std::vector<double>> centred(o, std::vector<double>(z.rows()));
    for (std::size_t i = 0; i < z.rows(); ++i) {
      const std::vector<double> logits = effective(poly.Evaluate(z.row(i)));
      for (std::size_t c = 0; c < o; ++c) centred[c][i] = logits[c];
    }
    for (std::size_t c = 0; c < o; ++c) report.scale.push_back(PopulationStd(centred[c]));
  }

  for (auto it = poly.terms.rbegin(); it != poly.terms.rend(); ++it) {
    if (IsConstant(it->first)) continue;
    Contribution entry;
    entry.exponent = it->first;
    entry.label = MonomialLabel(it->first);
    entry.coefficient = it->second;
    entry.monomial_std = PopulationStd(MonomialColumn(it->first, z));
    const std::vector<double> coef = effective(it->second);
    for (std::size_t c = 0; c < o; ++c) {
      // A flat logit means no term moves the prediction; report zeros.
      const double s = report.scale[c] > 0.0 ? coef[c] * entry.monomial_std / report.scale[c] : 0.0;
      entry.standardized.push_back(s);
      entry.score = std::max(entry.score, std::abs(s));
    }
    report.entries.push_back(std::move(entry));
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const Contribution& a, const Contribution& b) { return a.score > b.score; });
  for (const Contribution& e : report.entries) {
    if (e.score > 0.0) report.ranking.push_back(e.label);
  }
  return report;
}

Histogram DensityBins(std::span<const double> values, std::size_t bins) {
  if (values.empty()) Fail(ErrorKind::kInvalidArgument, "histogram of no values");
  if (bins == 0) Fail(ErrorKind::kInvalidArgument, "histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  Histogram h;
  if (!(hi > lo)) {
    h.edges = {lo, hi};
    h.mass = {1.0};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  h.edges.back() = hi;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  for (std::size_t c : counts)
    h.mass.push_back(static_cast<double>(c) / static_cast<double>(values.size()));
  return h;
}

Matrix ShapeFunction(const PolynomialExpansion& poly, std::size_t concept_index,
                     std::span<const double> grid) {
  if (concept_index >= poly.input_dim)
    Fail(ErrorKind::kInvalidArgument, "concept index " + std::to_string(concept_index) +
                                          " out of range for " + std::to_string(poly.input_dim) +
                                          " concepts");
  Matrix out(grid.size(), poly.output_dim);
  for (const auto& [e, coef] : poly.terms) {
    if (e[concept_index] == 0) continue;
    bool pure = true;
    for (std::size_t j = 0; j < e.size(); ++j) pure = pure && (j == concept_index || e[j] == 0);
    if (!pure) continue;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double v = std::pow(grid[g], e[concept_index]);
      for (std::size_t c = 0; c < poly.output_dim; ++c) out(g, c) += coef[c] * v;
    }
  }
  return out;
}

std::vector<ShapeFunctionTable> ShapeFunctions(const PolynomialExpansion& poly, const Matrix& z,
                                               const std::vector<std::string>& concept_names,
                                               std::size_t points, std::size_t bins) {
  if (z.rows() == 0) Fail(ErrorKind::kInvalidArgument, "no reference rows");
  if (z.cols() != poly.input_dim || concept_names.size() != poly.input_dim)
    Fail(ErrorKind::kShape, "concept names or reference width do not match the model");
  if (points < 2) Fail(ErrorKind::kInvalidArgument, "shape grid needs at least two points");
  std::vector<ShapeFunctionTable> out;
  for (std::size_t m = 0; m < poly.input_dim; ++m) {
    std::vector<double> col(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) col[i] = z(i, m);
    ShapeFunctionTable t;
    t.concept_name = concept_names[m];
    t.density = DensityBins(col, bins);
    const double lo = t.density.edges.front(), hi = t.density.edges.back();
    for (std::size_t g = 0; g < points; ++g)
      t.grid.push_back(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(points - 1));
    t.values = ShapeFunction(poly, m, t.grid);
    out.push_back(std::move(t));
  }
  return out;
}

std::string RenderPolynomial(const PolynomialExpansion& poly, int precision,
                             const std::vector<std::string>& output_labels) {
  if (precision < 0 || precision > 15) Fail(ErrorKind::kInvalidArgument, "precision must be in [0, 15]");
  const double scale = std::pow(10.0, precision);
  auto render_one = [&](std::size_t c) {
    std::string text;
    for (auto it = poly.terms.rbegin(); it != poly.terms.rend(); ++it) {
      const double rounded = std::round(it->second[c] * scale) / scale;
      if (rounded == 0.0) continue;
      std::string mag = FormatNumber(std::abs(rounded));
      if (!IsConstant(it->first)) mag += "*" + MonomialLabel(it->first);
      if (text.empty()) {
        text = (rounded < 0 ? "-" : "") + mag;
      } else {
        text += (rounded < 0 ? " - " : " + ") + mag;
      }
    }
    return text.empty() ? std::string("0.0") : text;
  };
  if (poly.output_dim == 1) return render_one(0);
  std::string out;
  for (std::size_t c = 0; c < poly.output_dim; ++c) {
    const std::string label = c < output_labels.size() ? output_labels[c] : std::to_string(c);
    out += label + ": " + render_one(c) + "\n";
  }
  return out;
}

json ContributionsToJson(const ContributionReport& r) {
  json entries = json::array();
  for (const Contribution& e : r.entries) {
    entries.push_back({{"monomial", e.label},
                       {"exponent", e.exponent},
                       {"coefficient", e.coefficient},
                       {"monomial_std", e.monomial_std},
                       {"standardized", e.standardized},
                       {"score", e.score}});
  }
  return {{"format_version", 1},
          {"concepts", r.concept_names},
          {"outputs", r.output_labels},
          {"scale", r.scale},
          {"entries", entries},
          {"ranking", r.ranking}};
}

std::string ContributionsToCsv(const ContributionReport& r) {
  std::ostringstream out;
  out << "rank,monomial,output,coefficient,monomial_std,standardized\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const Contribution& e = r.entries[i];
    for (std::size_t c = 0; c < e.coefficient.size(); ++c) {
      const std::string label = c < r.output_labels.size() ? r.output_labels[c] : std::to_string(c);
      out << i + 1 << ',' << e.label << ',' << label << ',' << FormatNumber(e.coefficient[c]) << ','
          << FormatNumber(e.monomial_std) << ',' << FormatNumber(e.standardized[c]) << '\n';
    }
  }
  return out.str();
}

json ShapesToJson(const std::vector<ShapeFunctionTable>& shapes,
                  const std::vector<std::string>& output_labels) {
  json arr = json::array();
  for (const ShapeFunctionTable& t : shapes) {
    json values = json::array();
    for (std::size_t g = 0; g < t.values.rows(); ++g) {
      const auto row = t.values.row(g);
      values.push_back(std::vector<double>(row.begin(), row.end()));
    }
    arr.push_back({{"concept", t.concept_name},
                   {"grid", t.grid},
                   {"values", values},
                   {"density", {{"edges", t.density.edges}, {"mass", t.density.mass}}}});
  }
  return {{"format_version", 1},
          {"outputs", output_labels},
          {"note", "values are raw-scale contributions with other concepts at zero"},
          {"shapes", arr}};
}

std::string ShapesToCsv(const std::vector<ShapeFunctionTable>& shapes,
                        const std::vector<std::string>& output_labels) {
  std::ostringstream out;
  out << "concept,v,output,value\n";
  for (const ShapeFunctionTable& t : shapes) {
    for (std::size_t g = 0; g < t.grid.size(); ++g) {
      for (std::size_t c = 0; c < t.values.cols(); ++c) {
        const std::string label = c < output_labels.size() ? output_labels[c] : std::to_string(c);
        out << t.concept_name << ',' << FormatNumber(t.grid[g]) << ',' << label << ','
            << FormatNumber(t.values(g, c)) << '\n';
      }
    }
  }
  return out.str();
}

std::string ContributionsSvg(const ContributionReport& r, std::size_t max_bars) {
  const std::size_t n = std::min(max_bars, r.ranking.size());
  const double bar_h = 18, label_w = 180, plot_w = 360, top = 30;
  const double height = top + bar_h * static_cast<double>(std::max<std::size_t>(n, 1)) + 20;
  double extent = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    extent = std::max(extent, std::abs(r.entries[i].standardized.back()));
  if (extent == 0.0) extent = 1.0;
  const double zero_x = label_w + plot_w / 2;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Px(label_w + plot_w + 20)
    << "\" height=\"" << Px(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<text x=\"10\" y=\"18\" font-size=\"13\">Standardized contributions</text>\n";
  if (n == 0) s << "<text x=\"10\" y=\"" << Px(top + 12) << "\">all coefficients are zero</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const Contribution& e = r.entries[i];
    const double v = e.standardized.back();
    const double w = std::abs(v) / extent * (plot_w / 2 - 10);
    const double y = top + bar_h * static_cast<double>(i);
    const double x = v < 0 ? zero_x - w : zero_x;
    s << "<text x=\"" << Px(label_w - 6) << "\" y=\"" << Px(y + 12) << "\" text-anchor=\"end\">"
      << XmlEscape(e.label) << "</text>\n";
    s << "<rect x=\"" << Px(x) << "\" y=\"" << Px(y + 2) << "\" width=\"" << Px(w)
      << "\" height=\"" << Px(bar_h - 4) << "\" fill=\"" << (v < 0 ? "#c0504d" : "#4f81bd")
      << "\"><title>" << FormatNumber(v) << "</title></rect>\n";
  }
  s << "<line x1=\"" << Px(zero_x) << "\" y1=\"" << Px(top) << "\" x2=\"" << Px(zero_x)
    << "\" y2=\"" << Px(height - 20) << "\" stroke=\"#333\"/>\n";
  s << "</svg>\n";
  return s.str();
}

std::string ShapesSvg(const std::vector<ShapeFunctionTable>& shapes) {
  const double panel_w = 300, panel_h = 220, pad = 30;
  const std::size_t cols = std::min<std::size_t>(3, std::max<std::size_t>(shapes.size(), 1));
  const std::size_t rows = (shapes.size() + cols - 1) / cols;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Px(panel_w * static_cast<double>(cols))
    << "\" height=\"" << Px(panel_h * static_cast<double>(std::max<std::size_t>(rows, 1)))
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const ShapeFunctionTable& t = shapes[k];
    const double ox = panel_w * static_cast<double>(k % cols);
    const double oy = panel_h * static_cast<double>(k / cols);
    const double w = panel_w - 2 * pad, h = panel_h - 2 * pad;
    const double hist_h = h * 0.25, line_h = h - hist_h - 6;
    s << "<g transform=\"translate(" << Px(ox) << "," << Px(oy) << ")\">\n";
    s << "<text x=\"" << Px(pad) << "\" y=\"" << Px(pad - 10) << "\">" << XmlEscape(t.concept_name)
      << "</text>\n";
    const std::size_t out = t.values.cols() - 1;
    double lo = t.values(0, out), hi = lo;
    for (std::size_t g = 0; g < t.grid.size(); ++g) {
      lo = std::min(lo, t.values(g, out));
      hi = std::max(hi, t.values(g, out));
    }
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double x0 = t.grid.front(), x1 = t.grid.back();
    const double xspan = x1 > x0 ? x1 - x0 : 1.0;
    s << "<polyline fill=\"none\" stroke=\"#4f81bd\" stroke-width=\"1.5\" points=\"";
    for (std::size_t g = 0; g < t.grid.size(); ++g) {
      const double px = pad + (t.grid[g] - x0) / xspan * w;
      const double py = pad + line_h - (t.values(g, out) - lo) / (hi - lo) * line_h;
      s << (g ? " " : "") << Px(px) << "," << Px(py);
    }
    s << "\"/>\n";
    const double max_mass = *std::max_element(t.density.mass.begin(), t.density.mass.end());
    const double bw = w / static_cast<double>(t.density.mass.size());
    for (std::size_t b = 0; b < t.density.mass.size(); ++b) {
      const double bh = t.density.mass[b] / max_mass * hist_h;
      s << "<rect x=\"" << Px(pad + bw * static_cast<double>(b)) << "\" y=\""
        << Px(pad + h - bh) << "\" width=\"" << Px(bw) << "\" height=\"" << Px(bh)
        << "\" fill=\"#999\"/>\n";
    }
    s << "<text x=\"" << Px(pad) << "\" y=\"" << Px(panel_h - 8) << "\">" << FormatNumber(x0)
      << "</text>\n<text x=\"" << Px(pad + w) << "\" y=\"" << Px(panel_h - 8)
      << "\" text-anchor=\"end\">" << FormatNumber(x1) << "</text>\n</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace cat
